//! Acceptance checks for the circqft workspace, one function per criterion.
//!
//! Run them with `cargo test -p circqft-validation --test acceptance`.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use circqft::circulant::{dft_matrix, verify_dft_diagonalizes, CirculantSpec};
use circqft::linalg::{hermitian_eigen, ComplexMatrix};
use circqft::models::{solve_level_shifts, FourLevelModel, SixLevelModel};
use circqft::propagator::{
    dynamical_phase_prediction, evolve_with, factor_phased_dft, phase_distance, step_halving_ratio,
    EvolveOptions, MAX_UNITARITY_DRIFT,
};
use circqft::qpe::{run_qpe, run_qpe_oracle, PhaseValue};
use circqft::schedule::{eigen_trajectories, uniform_grid, Direction, PulsePair, Schedule};
use circqft::{Error, Permutation, C64};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const T: f64 = 1.0;

pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn standard_schedule(et: f64) -> Schedule {
    let model = FourLevelModel::standard(et / T).unwrap();
    let (h0, h1) = model.hamiltonians();
    Schedule::new(PulsePair::sech_masked(T, T).unwrap(), h0, h1, Direction::Forward).unwrap()
}

fn random_hermitian_spec(rng: &mut ChaCha8Rng, n: usize) -> CirculantSpec {
    let mut c = vec![C64::new(0.0, 0.0); n];
    c[0] = C64::new(rng.gen_range(-2.0..2.0), 0.0);
    for k in 1..=n / 2 {
        let z = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        if 2 * k == n {
            c[k] = C64::new(z.re, 0.0);
        } else {
            c[k] = z;
            c[n - k] = z.conj();
        }
    }
    CirculantSpec::new(c).unwrap()
}

fn corpus() -> Vec<CirculantSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..200)
        .map(|_| {
            let n = rng.gen_range(2..=64);
            random_hermitian_spec(&mut rng, n)
        })
        .collect()
}

/// Eigenvalues of a Hermitian matrix via the real symmetric embedding
/// [[Re, −Im], [Im, Re]], whose spectrum is each eigenvalue twice.
fn dense_oracle_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.dim();
    let big = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = m[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(big).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.into_iter().step_by(2).collect()
}

pub fn circulant_diagonalization() -> Outcome {
    let start = Instant::now();
    let (mut off, mut diag) = (0.0f64, 0.0f64);
    for spec in corpus() {
        let check = verify_dft_diagonalizes(&spec);
        off = off.max(check.off_diagonal);
        diag = diag.max(check.diagonal_mismatch);
    }
    let elapsed = start.elapsed();
    outcome(
        off <= 1e-10 && diag <= 1e-10 && elapsed < Duration::from_secs(10),
        format!("max off-diagonal {off:.2e}, max diagonal mismatch {diag:.2e} (≤ 1e-10), {elapsed:.2?} (< 10 s)"),
    )
}

pub fn eigenvalues_vs_dense() -> Outcome {
    let mut worst = 0.0f64;
    for spec in corpus() {
        let mut closed = spec.real_eigenvalues();
        closed.sort_by(f64::total_cmp);
        let dense = dense_oracle_eigenvalues(&spec.materialize());
        for (a, b) in closed.iter().zip(&dense) {
            worst = worst.max((a - b).abs());
        }
    }
    outcome(worst <= 1e-10, format!("max multiset deviation {worst:.2e} (≤ 1e-10)"))
}

pub fn eigenvalue_trajectories() -> Outcome {
    let start = Instant::now();
    let e = 10.0 / T;
    let s = standard_schedule(e * T);
    let pulses = s.pulses();
    let levels = [-e, -e / 3.0, e / 3.0, e];
    let lambda = [-2.0 * e, -2.0 * e / 3.0, 2.0 * e / 3.0, 2.0 * e];

    let early = eigen_trajectories(&s, &[-4.0 * T]).unwrap();
    let (f, _) = pulses.evaluate(-4.0 * T);
    let early_err = early.eigenvalues[0]
        .iter()
        .zip(levels)
        .map(|(got, l)| ((got - f * l) / (f * l)).abs())
        .fold(0.0, f64::max);

    let late = eigen_trajectories(&s, &[4.0 * T]).unwrap();
    let (_, g) = pulses.evaluate(4.0 * T);
    let late_err = late.eigenvalues[0]
        .iter()
        .zip(lambda)
        .map(|(got, l)| ((got - g * l) / (g * l)).abs())
        .fold(0.0, f64::max);

    let sweep = eigen_trajectories(&s, &uniform_grid(-4.0 * T, 4.0 * T, 4000)).unwrap();
    let elapsed = start.elapsed();
    outcome(
        early_err <= 0.01 && late_err <= 0.01 && sweep.min_gap > 0.0 && elapsed < Duration::from_secs(5),
        format!(
            "t=−4T rel err {early_err:.2e}, t=+4T rel err {late_err:.2e} (≤ 1%), min gap {:.4e} at t={:.3} (> 0), {elapsed:.2?} (< 5 s)",
            sweep.min_gap, sweep.min_gap_time
        ),
    )
}

pub fn phase_estimation_demo() -> Outcome {
    let start = Instant::now();
    let s = standard_schedule(10.0).with_steps(4000).unwrap();
    let r = run_qpe(&PhaseValue::new(0.75, 2).unwrap(), &s).unwrap();
    let elapsed = start.elapsed();
    outcome(
        r.final_fidelity >= 0.99 && r.top_bits == [1, 1] && elapsed < Duration::from_secs(30),
        format!(
            "final fidelity {:.6} (≥ 0.99), bits {:?} (want [1, 1]), {elapsed:.2?} (< 30 s)",
            r.final_fidelity, r.top_bits
        ),
    )
}

pub fn integrator_quality() -> Outcome {
    let mut drift = 0.0f64;
    for et in [5.0, 10.0, 20.0, 40.0] {
        for dir in [Direction::Forward, Direction::Inverse] {
            let s = standard_schedule(et).with_direction(dir);
            let run = evolve_with(&s, EvolveOptions { sample_stride: 1, convergence_check: false }).unwrap();
            drift = drift.max(run.unitarity_drift);
        }
    }
    let ratio = step_halving_ratio(&standard_schedule(10.0).with_steps(1000).unwrap()).unwrap();
    outcome(
        drift <= MAX_UNITARITY_DRIFT && ratio >= 3.5,
        format!("max unitarity drift {drift:.2e} (≤ 1e-8), step-halving ratio {ratio:.3} (≥ 3.5)"),
    )
}

fn forward_residual(et: f64) -> f64 {
    let run = evolve_with(&standard_schedule(et), EvolveOptions { sample_stride: usize::MAX, convergence_check: false })
        .unwrap();
    factor_phased_dft(&run.final_propagator, Direction::Forward).unwrap().residual
}

pub fn adiabatic_limit() -> Outcome {
    let ets = [5.0, 10.0, 20.0, 40.0];
    let res: Vec<f64> = ets.iter().map(|&et| forward_residual(et)).collect();
    let monotone = res.windows(2).all(|w| w[1] <= 1.1 * w[0]);
    outcome(
        monotone && res[1] <= 0.05,
        format!(
            "residuals at E·T = 5, 10, 20, 40: {:.4e}, {:.4e}, {:.4e}, {:.4e} (nonincreasing ±10%, ≤ 0.05 at 10)",
            res[0], res[1], res[2], res[3]
        ),
    )
}

fn phase_gaps(et: f64) -> (Vec<f64>, Option<Vec<f64>>) {
    let s = standard_schedule(et);
    let run = evolve_with(&s, EvolveOptions { sample_stride: usize::MAX, convergence_check: false }).unwrap();
    let fac = factor_phased_dft(&run.final_propagator, Direction::Forward).unwrap();
    let pred = dynamical_phase_prediction(&s).unwrap();
    let gap = |p: &[f64]| fac.alpha.iter().zip(p).map(|(a, b)| phase_distance(*a, *b)).collect::<Vec<_>>();
    (gap(&pred.dynamical), pred.total().map(|t| gap(&t)))
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
}

pub fn adiabatic_phases() -> (Outcome, Outcome) {
    let (dynamical, total) = phase_gaps(20.0);
    let worst = dynamical.iter().copied().fold(0.0, f64::max);
    let literal = outcome(
        worst <= 0.05,
        format!("|α − (−∫ε dt)| mod 2π at E·T = 20: [{}] rad (≤ 0.05)", fmt_list(&dynamical)),
    );
    let total = total.unwrap_or_default();
    let worst_total = total.iter().copied().fold(f64::NAN, f64::max);
    let supplementary = outcome(
        total.len() == 4 && worst_total <= 0.05,
        format!(
            "with open-path geometric phase added: [{}] rad (≤ 0.05)",
            fmt_list(&total)
        ),
    );
    (literal, supplementary)
}

pub fn level_shift_solver() -> Outcome {
    let mut worst_value = 0.0f64;
    let mut worst_eq = 0.0f64;
    for e in [1.0, -1.0, 3.0, 0.37, 1e-6, 2.5e4, 1e9] {
        let sol = solve_level_shifts(e);
        let want = [2.0 * e / 3.0, -2.0 * e / 3.0, 2.0 * e / 3.0];
        let got = [sol.zeeman, sol.ground_stark, sol.excited_stark];
        for (g, w) in got.iter().zip(want) {
            worst_value = worst_value.max((g - w).abs() / e.abs());
        }
        // the four equations as written, evaluated directly
        let (z, gs, es) = (sol.zeeman, sol.ground_stark, sol.excited_stark);
        let eqs = [
            -0.5 * z + gs - (-e),
            0.5 * z + gs - (-e / 3.0),
            -0.5 * z + es - e / 3.0,
            0.5 * z + es - e,
        ];
        for r in eqs {
            worst_eq = worst_eq.max(r.abs() / e.abs());
        }
    }
    outcome(
        worst_value <= 1e-15 && worst_eq <= 1e-15,
        format!(
            "max |(E_Z, E_gS, E_eS) − (2E/3, −2E/3, 2E/3)|/|E| {worst_value:.2e}, max equation residual/|E| {worst_eq:.2e} (≤ 1e-15)"
        ),
    )
}

pub fn six_level_gauge() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut residual, mut spectrum) = (0.0f64, 0.0f64);
    let mut errors_raised = true;
    for _ in 0..50 {
        let modulus = rng.gen_range(0.1..5.0);
        let o1 = C64::from_polar(modulus, rng.gen_range(0.0..TAU));
        let o2 = C64::from_polar(modulus, rng.gen_range(0.0..TAU));
        let model = SixLevelModel::new(o1, o2);
        let red = model.gauge_reduction().unwrap();
        residual = residual.max(red.residual);
        let mut direct = hermitian_eigen(&model.h1()).unwrap().values;
        direct.sort_by(f64::total_cmp);
        let mut reduced = red.spec.real_eigenvalues();
        reduced.sort_by(f64::total_cmp);
        for (a, b) in direct.iter().zip(&reduced) {
            spectrum = spectrum.max((a - b).abs());
        }

        let other = C64::from_polar(modulus * rng.gen_range(1.05..3.0), rng.gen_range(0.0..TAU));
        let bad = SixLevelModel::new(o1, other).gauge_reduction();
        errors_raised &= matches!(bad, Err(Error::NotPhaseEquivalent(_)));
    }
    outcome(
        residual <= 1e-12 && spectrum <= 1e-10 && errors_raised,
        format!(
            "circulant residual {residual:.2e} (≤ 1e-12), spectrum deviation {spectrum:.2e} (≤ 1e-10), unequal moduli rejected: {errors_raised}"
        ),
    )
}

pub fn oracle_equivalence() -> Outcome {
    let s = standard_schedule(10.0);
    let mut tvs = Vec::new();
    for phi in [0.0, 0.25, 1.0 / 3.0, 0.6, 0.75] {
        let r = run_qpe(&PhaseValue::new(phi, 2).unwrap(), &s).unwrap();
        tvs.push(r.total_variation);
    }
    let worst = tvs.iter().copied().fold(0.0, f64::max);
    outcome(worst <= 1e-2, format!("total variation per φ: [{}] (≤ 1e-2)", fmt_list(&tvs)))
}

pub fn phase_irrelevance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sigma = Permutation::new(vec![3, 1, 0, 2]).unwrap();
    let round = |p: &[f64]| p.iter().map(|x| (x * 1e12).round() as i64).collect::<Vec<_>>();
    let mut identical = true;
    for phi in [0.0, 0.25, 1.0 / 3.0, 0.6, 0.75] {
        let phase = PhaseValue::new(phi, 2).unwrap();
        let base = round(&run_qpe_oracle(&phase, &[0.0; 4], &sigma).unwrap().distribution);
        for _ in 0..10 {
            let alpha: Vec<f64> = (0..4).map(|_| rng.gen_range(0.0..TAU)).collect();
            let d = round(&run_qpe_oracle(&phase, &alpha, &sigma).unwrap().distribution);
            identical &= d == base;
        }
    }
    // sanity: the oracle is the inverse DFT when α = 0 and σ = id
    let plain = circqft::qpe::ideal_phased_inverse_qft(&[0.0; 4], &Permutation::identity(4)).unwrap();
    let sane = plain.max_abs_diff(&dft_matrix(4).unwrap().adjoint()) < 1e-15;
    outcome(identical && sane, format!("10 random α vectors × 5 phases, distributions identical at 1e-12: {identical}"))
}
