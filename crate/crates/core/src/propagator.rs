//! Schrödinger propagation of the full unitary and its decomposition as a
//! phased, renumbered DFT.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::circulant::{dft_column, dft_matrix, CirculantSpec};
use crate::error::{Error, Result};
use crate::linalg::{exp_from_eigen, hermitian_eigen, ComplexMatrix, ComplexVector, HermitianEigen, CLUSTER_GAP};
use crate::permutation::Permutation;
use crate::schedule::{Direction, Schedule};

/// Largest ‖U†U − I‖_F accepted from the integrator.
pub const MAX_UNITARITY_DRIFT: f64 = 1e-8;
/// Pre-condition on the input of [`factor_phased_dft`].
pub const FACTOR_UNITARITY_TOL: f64 = 1e-8;
/// Two overlaps closer than this make the column assignment ambiguous.
pub const AMBIGUITY_TOL: f64 = 1e-3;
/// Factorization residual accepted for demo runs at E·T = 10.
pub const DEFAULT_ACCEPT_RESIDUAL: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvolveOptions {
    /// Keep every `sample_stride`-th propagator (the final one is always kept).
    pub sample_stride: usize,
    /// Re-run at twice the step count and report ‖U_n − U_2n‖_F.
    pub convergence_check: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { sample_stride: 1, convergence_check: true }
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    /// `samples[i]` is U(times[i]); `samples[0]` is the identity.
    pub samples: Vec<ComplexMatrix>,
    pub final_propagator: ComplexMatrix,
    /// max ‖U†U − I‖_F over the samples.
    pub unitarity_drift: f64,
    pub convergence_estimate: Option<f64>,
}

/// Integrates `i·dU/dt = H(t)·U` from the identity with exponential
/// midpoint steps `U ← exp(−i·H(t + δ/2)·δ)·U`.
pub fn evolve(s: &Schedule) -> Result<EvolutionResult> {
    evolve_with(s, EvolveOptions::default())
}

pub fn evolve_with(s: &Schedule, options: EvolveOptions) -> Result<EvolutionResult> {
    if options.sample_stride == 0 {
        return Err(Error::InvalidParameter("sample stride must be positive".into()));
    }
    let run = integrate(s, s.steps(), options.sample_stride)?;
    let convergence_estimate = if options.convergence_check {
        let fine = integrate(s, 2 * s.steps(), usize::MAX)?;
        Some((&run.final_propagator - &fine.final_propagator).frobenius_norm())
    } else {
        None
    };
    Ok(EvolutionResult {
        times: run.times,
        samples: run.samples,
        final_propagator: run.final_propagator,
        unitarity_drift: run.drift,
        convergence_estimate,
    })
}

struct Run {
    times: Vec<f64>,
    samples: Vec<ComplexMatrix>,
    final_propagator: ComplexMatrix,
    drift: f64,
}

fn integrate(s: &Schedule, steps: usize, stride: usize) -> Result<Run> {
    let (t_min, t_max) = s.window();
    let dt = (t_max - t_min) / steps as f64;
    let n = s.dim();
    let mut u = ComplexMatrix::identity(n);
    let mut times = vec![t_min];
    let mut samples = vec![u.clone()];
    let mut drift: f64 = 0.0;
    for k in 0..steps {
        let mid = t_min + (k as f64 + 0.5) * dt;
        let step = exp_from_eigen(&hermitian_eigen(&s.hamiltonian_at(mid))?, dt);
        u = &step * &u;
        let last = k + 1 == steps;
        if (k + 1) % stride == 0 || last {
            if !u.is_finite() {
                return Err(Error::Integration(format!("non-finite propagator at step {}", k + 1)));
            }
            let defect = u.unitarity_defect();
            drift = drift.max(defect);
            if defect > MAX_UNITARITY_DRIFT {
                return Err(Error::Integration(format!(
                    "unitarity drift {defect:.3e} exceeds {MAX_UNITARITY_DRIFT:e} at step {}",
                    k + 1
                )));
            }
            times.push(if last { t_max } else { t_min + (k + 1) as f64 * dt });
            samples.push(u.clone());
        }
    }
    Ok(Run { times, samples, final_propagator: u, drift })
}

/// ‖U_n − U_2n‖ / ‖U_2n − U_4n‖ for the schedule's step count `n`; ≈ 4
/// for a second-order integrator.
pub fn step_halving_ratio(s: &Schedule) -> Result<f64> {
    let n = s.steps();
    let [a, b, c] = [n, 2 * n, 4 * n]
        .map(|steps| integrate(s, steps, usize::MAX).map(|r| r.final_propagator));
    let (a, b, c) = (a?, b?, c?);
    Ok((&a - &b).frobenius_norm() / (&b - &c).frobenius_norm())
}

/// A propagator written as a renumbered DFT with per-column phases.
///
/// Forward: `U|n⟩ ≈ e^{iα_n}·F_{σ(n)}`. Inverse: `U·F_n ≈ e^{−iα_n}·|σ(n)⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasedDftFactorization {
    pub direction: Direction,
    pub sigma: Permutation,
    /// Phases in [0, 2π).
    pub alpha: Vec<f64>,
    /// ‖U − Φ(σ, α)‖_F.
    pub residual: f64,
}

impl PhasedDftFactorization {
    pub fn is_accepted(&self, threshold: f64) -> bool {
        self.residual <= threshold
    }

    /// The ideal phased transform Φ(σ, α) this factorization describes.
    pub fn ideal(&self) -> ComplexMatrix {
        match self.direction {
            Direction::Forward => phased_dft(&self.alpha, &self.sigma),
            Direction::Inverse => phased_inverse_dft(&self.alpha, &self.sigma),
        }
    }
}

/// `|n⟩ ↦ e^{iα_n}·F_{σ(n)}`.
pub fn phased_dft(alpha: &[f64], sigma: &Permutation) -> ComplexMatrix {
    let n = alpha.len();
    let mut m = ComplexMatrix::zeros(n);
    for (col, &a) in alpha.iter().enumerate() {
        m.set_column(col, &dft_column(n, sigma.apply(col)).scale(C64::from_polar(1.0, a)));
    }
    m
}

/// `F_n ↦ e^{−iα_n}·|σ(n)⟩`, i.e. `Σ_n e^{−iα_n}|σ(n)⟩⟨F_n|`.
pub fn phased_inverse_dft(alpha: &[f64], sigma: &Permutation) -> ComplexMatrix {
    let n = alpha.len();
    let mut m = ComplexMatrix::zeros(n);
    for (col, &a) in alpha.iter().enumerate() {
        let f = dft_column(n, col);
        let phase = C64::from_polar(1.0, -a);
        let row = sigma.apply(col);
        for k in 0..n {
            m[(row, k)] += phase * f[k].conj();
        }
    }
    m
}

/// Finds σ by maximal overlap and α from the phase of that overlap.
pub fn factor_phased_dft(u: &ComplexMatrix, direction: Direction) -> Result<PhasedDftFactorization> {
    let n = u.dim();
    let defect = u.unitarity_defect();
    if defect > FACTOR_UNITARITY_TOL {
        return Err(Error::InvalidParameter(format!(
            "propagator is not unitary (‖U†U − I‖ = {defect:.3e})"
        )));
    }
    let f = dft_matrix(n)?;
    // overlaps[(m, col)]: Forward ⟨F_m|U|col⟩, Inverse ⟨m|U|F_col⟩
    let overlaps = match direction {
        Direction::Forward => &f.adjoint() * u,
        Direction::Inverse => u * &f,
    };
    let mut map = Vec::with_capacity(n);
    let mut alpha = Vec::with_capacity(n);
    for col in 0..n {
        let mut ranked: Vec<(usize, f64)> = (0..n).map(|m| (m, overlaps[(m, col)].norm())).collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        if n > 1 && ranked[0].1 - ranked[1].1 < AMBIGUITY_TOL {
            return Err(Error::Ambiguous(format!(
                "column {col} overlaps targets {} and {} within {AMBIGUITY_TOL:e}",
                ranked[0].0, ranked[1].0
            )));
        }
        let best = ranked[0].0;
        let phase = overlaps[(best, col)].arg();
        map.push(best);
        alpha.push(wrap_phase(match direction {
            Direction::Forward => phase,
            Direction::Inverse => -phase,
        }));
    }
    let sigma = Permutation::new(map.clone()).map_err(|_| {
        let (j, k) = first_repeat(&map);
        Error::Ambiguous(format!("columns {j} and {k} both map to target {}", map[j]))
    })?;
    let mut fact = PhasedDftFactorization { direction, sigma, alpha, residual: 0.0 };
    fact.residual = (u - &fact.ideal()).frobenius_norm();
    Ok(fact)
}

fn first_repeat(map: &[usize]) -> (usize, usize) {
    for j in 0..map.len() {
        for k in (j + 1)..map.len() {
            if map[j] == map[k] {
                return (j, k);
            }
        }
    }
    (0, 0)
}

/// Maps each H0 level `j` to the circulant index `n` whose eigenvalue has
/// the same ascending rank; adiabatic evolution without crossings
/// preserves rank.
pub fn predict_permutation(h0: &ComplexMatrix, h1: &ComplexMatrix) -> Result<Permutation> {
    let energies: Vec<f64> = h0.diagonal().iter().map(|z| z.re).collect();
    let lambda = CirculantSpec::from_matrix(h1)?.real_eigenvalues();
    if energies.len() != lambda.len() {
        return Err(Error::DimensionMismatch { expected: energies.len(), found: lambda.len() });
    }
    let rank_h0 = ascending_order(&energies, "H0 diagonal")?;
    let rank_h1 = ascending_order(&lambda, "circulant spectrum")?;
    let mut map = vec![0; energies.len()];
    for (j, n) in rank_h0.into_iter().zip(rank_h1) {
        map[j] = n;
    }
    Permutation::new(map)
}

/// Indices sorted by value; errors when two values share a cluster.
fn ascending_order(values: &[f64], what: &str) -> Result<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for w in order.windows(2) {
        if values[w[1]] - values[w[0]] <= CLUSTER_GAP * scale {
            return Err(Error::Degenerate(format!(
                "{what} entries {} and {} coincide ({:.6e})",
                w[0], w[1], values[w[0]]
            )));
        }
    }
    Ok(order)
}

/// Adiabatic phase predictions, in the same convention as
/// [`PhasedDftFactorization::alpha`] for the schedule's direction and
/// indexed the same way (by basis state for Forward, by DFT column for
/// Inverse).
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePrediction {
    /// `∓∫ε dt` along each rank-tracked branch, in [0, 2π).
    pub dynamical: Vec<f64>,
    /// Open-path geometric phase of each branch between the initial label
    /// state and its target, in [0, 2π). `None` when the target is not
    /// defined (degenerate circulant spectrum, or H(t) = 0 somewhere).
    pub geometric: Option<Vec<f64>>,
}

impl PhasePrediction {
    pub fn total(&self) -> Option<Vec<f64>> {
        self.geometric
            .as_ref()
            .map(|g| self.dynamical.iter().zip(g).map(|(d, g)| wrap_phase(d + g)).collect())
    }
}

/// Integrates the instantaneous eigenvalue of the branch connected to each
/// initial label state (trapezoidal rule on the schedule grid).
///
/// The Forward phase is `−∫ε dt`; for Inverse schedules the sign is
/// flipped to match the `e^{−iα}` convention of the inverse factorization.
/// Meaningful only in the adiabatic regime, see
/// [`adiabaticity_report`](crate::schedule::adiabaticity_report).
pub fn dynamical_phase_prediction(s: &Schedule) -> Result<PhasePrediction> {
    let grid = s.grid();
    let n = s.dim();
    let eigs: Vec<HermitianEigen> = grid.par_iter().map(|&t| s.eigen_at(t)).collect::<Result<_>>()?;

    let mut zero_somewhere = false;
    for (&t, e) in grid.iter().zip(&eigs) {
        let scale = e.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            zero_somewhere = true;
            continue;
        }
        let gap = e.min_gap();
        if gap <= CLUSTER_GAP * scale {
            return Err(Error::BranchTracking { time: t, gap });
        }
    }

    let labels: Vec<ComplexVector> = match s.direction() {
        Direction::Forward => (0..n).map(|j| ComplexVector::basis(n, j)).collect(),
        Direction::Inverse => (0..n).map(|m| dft_column(n, m)).collect(),
    };
    // the start Hamiltonian is (nearly) diagonal in the label basis, so the
    // label expectation values order the branches
    let h_start = s.hamiltonian_at(grid[0]);
    let expectation: Vec<f64> = labels.iter().map(|l| l.inner(&h_start.mul_vec(l)).re).collect();
    let mut by_energy: Vec<usize> = (0..n).collect();
    by_energy.sort_by(|&a, &b| expectation[a].total_cmp(&expectation[b]));
    let mut branch = vec![0; n];
    for (rank, &label) in by_energy.iter().enumerate() {
        branch[label] = rank;
    }

    let integrals: Vec<f64> = (0..n)
        .map(|rank| {
            grid.windows(2)
                .zip(eigs.windows(2))
                .map(|(t, e)| 0.5 * (t[1] - t[0]) * (e[0].values[rank] + e[1].values[rank]))
                .sum()
        })
        .collect();
    let sign = match s.direction() {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    let dynamical = (0..n).map(|l| wrap_phase(sign * integrals[branch[l]])).collect();

    let geometric = if zero_somewhere {
        None
    } else {
        predict_permutation(s.h0(), s.h1())
            .ok()
            .and_then(|sigma| geometric_phases(s.direction(), &eigs, &labels, &branch, &sigma))
    };
    Ok(PhasePrediction { dynamical, geometric })
}

fn geometric_phases(
    direction: Direction,
    eigs: &[HermitianEigen],
    labels: &[ComplexVector],
    branch: &[usize],
    sigma: &Permutation,
) -> Option<Vec<f64>> {
    let n = labels.len();
    let last = eigs.len() - 1;
    let mut out = Vec::with_capacity(n);
    for (l, initial) in labels.iter().enumerate() {
        let rank = branch[l];
        let target = match direction {
            Direction::Forward => dft_column(n, sigma.apply(l)),
            Direction::Inverse => ComplexVector::basis(n, sigma.inverse().apply(l)),
        };
        // ⟨target|χ_end⟩·Π⟨χ_{k+1}|χ_k⟩·⟨χ_0|initial⟩ is independent of the
        // eigenvector phases returned by the solver
        let mut acc = eigs[0].vector(rank).inner(initial);
        for w in eigs.windows(2) {
            acc *= w[1].vector(rank).inner(&w[0].vector(rank));
        }
        acc *= target.inner(&eigs[last].vector(rank));
        if acc.norm() < 1e-12 {
            return None;
        }
        out.push(wrap_phase(match direction {
            Direction::Forward => acc.arg(),
            Direction::Inverse => -acc.arg(),
        }));
    }
    Some(out)
}

/// Reduces a phase into [0, 2π).
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance between two phases on the circle, in [0, π].
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = wrap_phase(a - b);
    if d > PI {
        TAU - d
    } else {
        d
    }
}
