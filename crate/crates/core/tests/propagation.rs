use circqft::models::FourLevelModel;
use circqft::propagator::{
    dynamical_phase_prediction, evolve_with, factor_phased_dft, phase_distance, predict_permutation,
    step_halving_ratio, wrap_phase, EvolveOptions,
};
use circqft::schedule::{Direction, PulsePair, Schedule};
use circqft::C64;
use proptest::prelude::*;

const FINAL_ONLY: EvolveOptions = EvolveOptions { sample_stride: usize::MAX, convergence_check: false };

fn schedule(et: f64, pulses: PulsePair, direction: Direction) -> Schedule {
    let (h0, h1) = FourLevelModel::standard(et).unwrap().hamiltonians();
    Schedule::new(pulses, h0, h1, direction).unwrap()
}

fn sech() -> PulsePair {
    PulsePair::sech_masked(1.0, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn propagator_stays_unitary(e in 0.5..30.0f64, re in -1.5..1.5f64, im in 0.1..1.5f64, steps in 200usize..1200) {
        let (h0, h1) = FourLevelModel::new(e, C64::new(re * e, im * e)).unwrap().hamiltonians();
        let s = Schedule::new(sech(), h0, h1, Direction::Forward).unwrap().with_steps(steps).unwrap();
        let run = evolve_with(&s, EvolveOptions { sample_stride: 7, convergence_check: false }).unwrap();
        prop_assert!(run.unitarity_drift <= 1e-8);
        prop_assert!(run.final_propagator.unitarity_defect() <= 1e-8);
        prop_assert_eq!(run.times.len(), run.samples.len());
    }

    #[test]
    fn integrator_is_second_order(et in 1.0..8.0f64) {
        let s = schedule(et, sech(), Direction::Forward).with_steps(400).unwrap();
        let ratio = step_halving_ratio(&s).unwrap();
        prop_assert!(ratio >= 3.5, "ratio {ratio}");
    }
}

#[test]
fn convergence_estimate_shrinks_with_steps() {
    let s = schedule(10.0, sech(), Direction::Forward);
    let est = |n| {
        let s = s.clone().with_steps(n).unwrap();
        evolve_with(&s, EvolveOptions { sample_stride: usize::MAX, convergence_check: true })
            .unwrap()
            .convergence_estimate
            .unwrap()
    };
    let (a, b) = (est(500), est(1000));
    assert!(a / b > 3.5, "{a} vs {b}");
}

#[test]
fn residual_decreases_toward_adiabatic_limit() {
    let res: Vec<f64> = [5.0, 10.0, 20.0, 40.0]
        .iter()
        .map(|&et| {
            let run = evolve_with(&schedule(et, sech(), Direction::Forward), FINAL_ONLY).unwrap();
            factor_phased_dft(&run.final_propagator, Direction::Forward).unwrap().residual
        })
        .collect();
    for w in res.windows(2) {
        assert!(w[1] <= 1.1 * w[0], "{res:?}");
    }
}

#[test]
fn factorized_permutation_matches_prediction() {
    let s = schedule(20.0, sech(), Direction::Forward);
    let run = evolve_with(&s, FINAL_ONLY).unwrap();
    let fwd = factor_phased_dft(&run.final_propagator, Direction::Forward).unwrap();
    let sigma = predict_permutation(s.h0(), s.h1()).unwrap();
    assert_eq!(fwd.sigma, sigma);

    let inv_run = evolve_with(&s.clone().with_direction(Direction::Inverse), FINAL_ONLY).unwrap();
    let inv = factor_phased_dft(&inv_run.final_propagator, Direction::Inverse).unwrap();
    assert_eq!(inv.sigma, sigma.inverse());
}

#[test]
fn round_trip_is_diagonal_up_to_phases() {
    let s = schedule(20.0, sech(), Direction::Forward);
    let u = evolve_with(&s, FINAL_ONLY).unwrap().final_propagator;
    let v = evolve_with(&s.with_direction(Direction::Inverse), FINAL_ONLY).unwrap().final_propagator;
    let round = &v * &u;
    assert!(round.off_diagonal_norm() < 0.02, "{}", round.off_diagonal_norm());
    for z in round.diagonal() {
        assert!((z.norm() - 1.0).abs() < 1e-3);
    }
}

#[test]
fn forward_and_inverse_phases_split_into_dynamical_and_geometric() {
    // α_fwd = −D + γ and α_inv = D + γ along each branch
    let pulses = PulsePair::tanh(1.0).unwrap();
    let fwd_s = schedule(20.0, pulses, Direction::Forward);
    let inv_s = fwd_s.clone().with_direction(Direction::Inverse);
    let fwd = factor_phased_dft(&evolve_with(&fwd_s, FINAL_ONLY).unwrap().final_propagator, Direction::Forward)
        .unwrap();
    let inv = factor_phased_dft(&evolve_with(&inv_s, FINAL_ONLY).unwrap().final_propagator, Direction::Inverse)
        .unwrap();
    let pred = dynamical_phase_prediction(&fwd_s).unwrap();
    let geometric = pred.geometric.clone().unwrap();
    for n in 0..4 {
        let m = fwd.sigma.apply(n);
        let (a, b) = (fwd.alpha[n], inv.alpha[m]);
        let d = -pred.dynamical[n];
        assert!(phase_distance(wrap_phase(b - a), wrap_phase(2.0 * d)) < 0.1, "branch {n}: difference");
        assert!(phase_distance(wrap_phase(b + a), wrap_phase(2.0 * geometric[n])) < 0.1, "branch {n}: sum");
    }
}

#[test]
fn total_phase_prediction_matches_extraction() {
    let s = schedule(20.0, sech(), Direction::Forward);
    let fac = factor_phased_dft(&evolve_with(&s, FINAL_ONLY).unwrap().final_propagator, Direction::Forward).unwrap();
    let total = dynamical_phase_prediction(&s).unwrap().total().unwrap();
    for (a, b) in fac.alpha.iter().zip(&total) {
        assert!(phase_distance(*a, *b) < 0.05, "{a} vs {b}");
    }
}
