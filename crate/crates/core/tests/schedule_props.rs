use circqft::models::FourLevelModel;
use circqft::schedule::{adiabaticity_report, eigen_trajectories, uniform_grid, Direction, PulsePair, Schedule};
use circqft::C64;
use proptest::prelude::*;

fn ring_schedule(e: f64, v: C64, pulses: PulsePair) -> Schedule {
    let (h0, h1) = FourLevelModel::new(e, v).unwrap().hamiltonians();
    Schedule::new(pulses, h0, h1, Direction::Forward).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn tanh_ratio_is_exponential(t_cross in 0.1..10.0f64, x in -8.0..8.0f64) {
        let t = x * t_cross;
        for p in [PulsePair::tanh(t_cross).unwrap(), PulsePair::sech_masked(t_cross, 0.7 * t_cross).unwrap()] {
            let (f, g) = p.evaluate(t);
            let want = (2.0 * t / t_cross).exp();
            prop_assert!(((g / f) - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn tanh_pulses_stay_in_unit_interval(t_cross in 0.1..10.0f64, x in -50.0..50.0f64) {
        let (f, g) = PulsePair::tanh(t_cross).unwrap().evaluate(x * t_cross);
        prop_assert!((0.0..=1.0).contains(&f) && (0.0..=1.0).contains(&g));
        prop_assert!((f + g - 1.0).abs() <= 2.0 * f64::EPSILON);
    }

    #[test]
    fn inverse_is_time_mirror_of_forward(
        e in 0.5..20.0f64, re in -2.0..2.0f64, im in -2.0..2.0f64, x in -6.0..6.0f64,
    ) {
        let s = ring_schedule(e, C64::new(re, im), PulsePair::tanh(1.0).unwrap());
        let inv = s.clone().with_direction(Direction::Inverse);
        let diff = s.hamiltonian_at(x).max_abs_diff(&inv.hamiltonian_at(-x));
        prop_assert!(diff <= 1e-12 * (1.0 + e));
    }

    #[test]
    fn schedule_hamiltonian_is_hermitian(e in 0.5..20.0f64, re in -2.0..2.0f64, im in -2.0..2.0f64, x in -6.0..6.0f64) {
        let s = ring_schedule(e, C64::new(re, im), PulsePair::sech_masked(1.0, 1.0).unwrap());
        prop_assert!(s.hamiltonian_at(x).hermitian_deviation() == 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn trajectories_refine_continuously(e in 1.0..20.0f64, phase in 0.2..1.3f64) {
        let s = ring_schedule(e, C64::from_polar(e * 1.05, phase), PulsePair::sech_masked(1.0, 1.0).unwrap());
        let coarse = eigen_trajectories(&s, &uniform_grid(-4.0, 4.0, 200)).unwrap();
        let fine = eigen_trajectories(&s, &uniform_grid(-4.0, 4.0, 400)).unwrap();
        // shared grid points agree exactly
        for (k, ev) in coarse.eigenvalues.iter().enumerate() {
            prop_assert_eq!(ev, &fine.eigenvalues[2 * k]);
        }
        // Lipschitz: halving the spacing roughly halves the largest jump
        prop_assert!(fine.max_step_jump() <= 0.6 * coarse.max_step_jump());
    }
}

#[test]
fn adiabaticity_margin_scales_with_energy() {
    let report = |e: f64| {
        let s = ring_schedule(e, C64::new(e, e / 3.0), PulsePair::sech_masked(1.0, 1.0).unwrap());
        adiabaticity_report(&s, &uniform_grid(-4.0, 4.0, 800)).unwrap()
    };
    let strong = report(10.0);
    let weak = report(0.1);
    assert!(strong.margin > 1.0, "margin {}", strong.margin);
    assert!(weak.margin < 1.0, "margin {}", weak.margin);
    // the coupling is geometric and does not depend on E
    assert!((strong.max_coupling - weak.max_coupling).abs() < 1e-6 * strong.max_coupling);
    assert!((strong.margin / weak.margin - 100.0).abs() < 1e-6 * 100.0);
}

#[test]
fn degenerate_circulant_is_flagged() {
    // real V: λ1 = λ3 = 0 once H0 is switched off
    let s = ring_schedule(1.0, C64::new(1.0, 0.0), PulsePair::Constant { f: 0.0, g: 1.0 });
    let report = adiabaticity_report(&s, &uniform_grid(-1.0, 1.0, 10)).unwrap();
    assert_eq!(report.warnings.len(), 9);
    assert!(report.rows.iter().all(|r| r.max_coupling.is_nan()));

    let complex = ring_schedule(1.0, C64::new(1.0, 1.0 / 3.0), PulsePair::Constant { f: 0.0, g: 1.0 });
    assert!(adiabaticity_report(&complex, &uniform_grid(-1.0, 1.0, 10)).unwrap().warnings.is_empty());
}
