//! Pulse pairs and the scheduled Hamiltonian that carries a diagonal
//! `H0` into a Hermitian circulant `H1` (or back).

use rayon::prelude::*;

use crate::circulant::CirculantSpec;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix, ComplexVector, HermitianEigen, CLUSTER_GAP};

/// Default half-width of the time window in units of the pulse timescale.
pub const DEFAULT_WINDOW_HALF_WIDTH: f64 = 6.0;
pub const DEFAULT_STEPS: usize = 4000;

/// The pair of envelopes `(f, g)` multiplying `H0` and `H1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PulsePair {
    /// `f = [1 − tanh(t/T)]/2`, `g = [1 + tanh(t/T)]/2`.
    Tanh { t_cross: f64 },
    /// `f = sech(t/τ)[1 − tanh(t/T)]`, `g = sech(t/τ)[1 + tanh(t/T)]`.
    SechMasked { t_cross: f64, tau: f64 },
    /// Time-independent amplitudes, for reference runs.
    Constant { f: f64, g: f64 },
}

impl PulsePair {
    pub fn tanh(t_cross: f64) -> Result<Self> {
        let p = PulsePair::Tanh { t_cross };
        p.validate()?;
        Ok(p)
    }

    pub fn sech_masked(t_cross: f64, tau: f64) -> Result<Self> {
        let p = PulsePair::SechMasked { t_cross, tau };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {x}")))
            }
        };
        match *self {
            PulsePair::Tanh { t_cross } => positive("T", t_cross),
            PulsePair::SechMasked { t_cross, tau } => {
                positive("T", t_cross)?;
                positive("tau", tau)
            }
            PulsePair::Constant { f, g } => {
                if f.is_finite() && g.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter("constant amplitudes must be finite".into()))
                }
            }
        }
    }

    /// `(f(t), g(t))`.
    pub fn evaluate(&self, t: f64) -> (f64, f64) {
        match *self {
            // [1 ∓ tanh x]/2 = 1/(1 + e^{±2x}), free of cancellation for large |x|
            PulsePair::Tanh { t_cross } => logistic_pair(t / t_cross),
            PulsePair::SechMasked { t_cross, tau } => {
                let (f, g) = logistic_pair(t / t_cross);
                let mask = 2.0 * sech(t / tau);
                (mask * f, mask * g)
            }
            PulsePair::Constant { f, g } => (f, g),
        }
    }

    /// Timescale used for the default window (T, or 1 for constant pulses).
    pub fn timescale(&self) -> f64 {
        match *self {
            PulsePair::Tanh { t_cross } | PulsePair::SechMasked { t_cross, .. } => t_cross,
            PulsePair::Constant { .. } => 1.0,
        }
    }
}

fn logistic_pair(x: f64) -> (f64, f64) {
    (1.0 / (1.0 + (2.0 * x).exp()), 1.0 / (1.0 + (-2.0 * x).exp()))
}

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    /// `H(t) = f(t)·H0 + g(t)·H1`: basis states → Fourier columns.
    Forward,
    /// `H(t) = g(t)·H0 + f(t)·H1`: Fourier columns → basis states.
    Inverse,
}

/// A validated time-dependent Hamiltonian on a uniform grid.
#[derive(Clone, Debug)]
pub struct Schedule {
    pulses: PulsePair,
    h0: ComplexMatrix,
    h1: ComplexMatrix,
    h1_spec: CirculantSpec,
    direction: Direction,
    window: (f64, f64),
    steps: usize,
}

impl Schedule {
    /// Checks that `h0` is diagonal with distinct real entries and `h1` is a
    /// Hermitian circulant of the same dimension.
    pub fn new(
        pulses: PulsePair,
        h0: ComplexMatrix,
        h1: ComplexMatrix,
        direction: Direction,
    ) -> Result<Self> {
        pulses.validate()?;
        let n = h0.dim();
        if h1.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: h1.dim() });
        }
        if !h0.is_finite() || !h1.is_finite() {
            return Err(Error::InvalidParameter("Hamiltonian entries must be finite".into()));
        }
        for j in 0..n {
            for k in 0..n {
                let z = h0[(j, k)];
                if j != k && z.norm() != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "H0 must be diagonal; entry ({j},{k}) is nonzero"
                    )));
                }
                if j == k && z.im != 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "H0 diagonal entry {j} is not real"
                    )));
                }
            }
        }
        let mut energies: Vec<(f64, usize)> =
            h0.diagonal().iter().enumerate().map(|(k, z)| (z.re, k)).collect();
        energies.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in energies.windows(2) {
            if w[1].0 - w[0].0 <= 0.0 {
                return Err(Error::Degenerate(format!(
                    "H0 levels {} and {} are equal ({})",
                    w[0].1, w[1].1, w[0].0
                )));
            }
        }
        let h1_spec = CirculantSpec::from_matrix(&h1)?;
        if !h1_spec.is_hermitian() {
            return Err(Error::InvalidParameter("H1 is circulant but not Hermitian".into()));
        }
        let half = DEFAULT_WINDOW_HALF_WIDTH * pulses.timescale();
        Ok(Self {
            pulses,
            h0,
            h1,
            h1_spec,
            direction,
            window: (-half, half),
            steps: DEFAULT_STEPS,
        })
    }

    pub fn with_window(mut self, t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
            return Err(Error::InvalidParameter(format!(
                "window [{t_min}, {t_max}] must be finite and increasing"
            )));
        }
        self.window = (t_min, t_max);
        Ok(self)
    }

    pub fn with_steps(mut self, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidParameter("steps must be positive".into()));
        }
        self.steps = steps;
        Ok(self)
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn with_pulses(mut self, pulses: PulsePair) -> Result<Self> {
        pulses.validate()?;
        self.pulses = pulses;
        Ok(self)
    }

    pub fn pulses(&self) -> PulsePair {
        self.pulses
    }

    pub fn h0(&self) -> &ComplexMatrix {
        &self.h0
    }

    pub fn h1(&self) -> &ComplexMatrix {
        &self.h1
    }

    pub fn h1_spec(&self) -> &CirculantSpec {
        &self.h1_spec
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub fn dt(&self) -> f64 {
        (self.window.1 - self.window.0) / self.steps as f64
    }

    /// `steps + 1` uniformly spaced times covering the window.
    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.window.0, self.window.1, self.steps)
    }

    /// Weights of `(H0, H1)` at time `t` for this direction.
    pub fn coefficients(&self, t: f64) -> (f64, f64) {
        let (f, g) = self.pulses.evaluate(t);
        match self.direction {
            Direction::Forward => (f, g),
            Direction::Inverse => (g, f),
        }
    }

    pub fn hamiltonian_at(&self, t: f64) -> ComplexMatrix {
        let (a, b) = self.coefficients(t);
        ComplexMatrix::linear_combination(a, &self.h0, b, &self.h1)
    }

    pub(crate) fn eigen_at(&self, t: f64) -> Result<HermitianEigen> {
        Ok(hermitian_eigen(&self.hamiltonian_at(t))?)
    }
}

pub fn uniform_grid(t_min: f64, t_max: f64, steps: usize) -> Vec<f64> {
    let dt = (t_max - t_min) / steps as f64;
    (0..=steps).map(|k| if k == steps { t_max } else { t_min + k as f64 * dt }).collect()
}

/// Instantaneous eigenvalues of the schedule on a time grid.
#[derive(Clone, Debug)]
pub struct EigenTrajectories {
    pub times: Vec<f64>,
    /// `eigenvalues[i]` is the ascending spectrum at `times[i]`.
    pub eigenvalues: Vec<Vec<f64>>,
    pub min_gap: f64,
    pub min_gap_time: f64,
}

impl EigenTrajectories {
    /// Largest change of any sorted eigenvalue between neighbouring grid points.
    pub fn max_step_jump(&self) -> f64 {
        self.eigenvalues
            .windows(2)
            .flat_map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

pub fn eigen_trajectories(s: &Schedule, grid: &[f64]) -> Result<EigenTrajectories> {
    let eigenvalues: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&t| s.eigen_at(t).map(|e| e.values))
        .collect::<Result<_>>()?;
    let (mut min_gap, mut min_gap_time) = (f64::INFINITY, f64::NAN);
    for (&t, ev) in grid.iter().zip(&eigenvalues) {
        let gap = ev.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if gap < min_gap {
            min_gap = gap;
            min_gap_time = t;
        }
    }
    Ok(EigenTrajectories { times: grid.to_vec(), eigenvalues, min_gap, min_gap_time })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdiabaticityRow {
    pub t: f64,
    pub min_gap: f64,
    pub max_coupling: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegeneracyWarning {
    pub t: f64,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct AdiabaticityReport {
    /// One row per interior grid point.
    pub rows: Vec<AdiabaticityRow>,
    pub min_gap: f64,
    pub max_coupling: f64,
    /// min over time and pairs of |ε_m − ε_n| / |⟨χ̇_m|χ_n⟩| (∞ when no coupling).
    pub margin: f64,
    /// The `1/T` scale the couplings are expected to follow.
    pub heuristic_scale: f64,
    pub warnings: Vec<DegeneracyWarning>,
}

/// Gap-to-coupling ratios along the schedule.
///
/// Couplings come from central differences of eigenvectors on neighbouring
/// grid points. Each eigenvector is phase-fixed so that its largest
/// component at the centre time is real positive; the same component is
/// used at `t ± δ`. Points where two eigenvalues fall inside the cluster
/// gap are reported as warnings and skipped.
pub fn adiabaticity_report(s: &Schedule, grid: &[f64]) -> Result<AdiabaticityReport> {
    if grid.len() < 3 {
        return Err(Error::InvalidParameter("adiabaticity grid needs at least 3 points".into()));
    }
    let eigs: Vec<HermitianEigen> =
        grid.par_iter().map(|&t| s.eigen_at(t)).collect::<Result<_>>()?;
    let n = s.dim();

    let per_point: Vec<(AdiabaticityRow, f64, Option<DegeneracyWarning>)> = (1..grid.len() - 1)
        .into_par_iter()
        .map(|i| {
            let (prev, here, next) = (&eigs[i - 1], &eigs[i], &eigs[i + 1]);
            let t = grid[i];
            let delta = grid[i + 1] - grid[i - 1];
            let gap = here.min_gap();
            let scale = here.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
            if n > 1 && gap <= CLUSTER_GAP * scale {
                let row = AdiabaticityRow { t, min_gap: gap, max_coupling: f64::NAN };
                return (row, f64::INFINITY, Some(DegeneracyWarning { t, gap }));
            }
            let mut max_coupling: f64 = 0.0;
            let mut margin = f64::INFINITY;
            for m in 0..n {
                let centre = here.vector(m);
                let reference = largest_component(&centre);
                let ahead = phase_fixed(next.vector(m), reference);
                let behind = phase_fixed(prev.vector(m), reference);
                let derivative = ComplexVector(
                    ahead.iter().zip(behind.iter()).map(|(a, b)| (a - b) / delta).collect(),
                );
                for k in 0..n {
                    if k == m {
                        continue;
                    }
                    let coupling = derivative.inner(&here.vector(k)).norm();
                    max_coupling = max_coupling.max(coupling);
                    if coupling > 0.0 {
                        margin = margin.min((here.values[m] - here.values[k]).abs() / coupling);
                    }
                }
            }
            (AdiabaticityRow { t, min_gap: gap, max_coupling }, margin, None)
        })
        .collect();

    let mut rows = Vec::with_capacity(per_point.len());
    let mut warnings = Vec::new();
    let (mut min_gap, mut max_coupling, mut margin) = (f64::INFINITY, 0.0_f64, f64::INFINITY);
    for (row, point_margin, warning) in per_point {
        min_gap = min_gap.min(row.min_gap);
        if row.max_coupling.is_finite() {
            max_coupling = max_coupling.max(row.max_coupling);
        }
        margin = margin.min(point_margin);
        warnings.extend(warning);
        rows.push(row);
    }
    Ok(AdiabaticityReport {
        rows,
        min_gap,
        max_coupling,
        margin,
        heuristic_scale: 1.0 / s.pulses().timescale(),
        warnings,
    })
}

/// Index of the largest-modulus component; ties go to the lowest index.
fn largest_component(v: &ComplexVector) -> usize {
    let mut best = 0;
    for k in 1..v.len() {
        if v[k].norm() > v[best].norm() {
            best = k;
        }
    }
    best
}

fn phase_fixed(v: ComplexVector, reference: usize) -> ComplexVector {
    let z = v[reference];
    if z.norm() == 0.0 {
        return v;
    }
    v.scale(z.conj() / z.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    fn four_level(e: f64) -> (ComplexMatrix, ComplexMatrix) {
        let h0 = ComplexMatrix::from_real_diagonal(&[-e, -e / 3.0, e / 3.0, e]);
        let v = C64::new(e, e / 3.0);
        let z = C64::new(0.0, 0.0);
        let h1 = CirculantSpec::new(vec![z, v.conj(), z, v]).unwrap().materialize();
        (h0, h1)
    }

    #[test]
    fn pulse_values_at_origin() {
        let (f, g) = PulsePair::tanh(2.0).unwrap().evaluate(0.0);
        assert_eq!((f, g), (0.5, 0.5));
        let (f, g) = PulsePair::sech_masked(1.3, 0.4).unwrap().evaluate(0.0);
        assert_eq!((f, g), (1.0, 1.0));
    }

    #[test]
    fn tanh_ratio_three_t() {
        let t_cross = 1.5;
        let (f, g) = PulsePair::tanh(t_cross).unwrap().evaluate(3.0 * t_cross);
        // (1 + tanh 3)/(1 − tanh 3) = e^6
        assert!((g / f - 6f64.exp()).abs() < 1e-10 * 6f64.exp());
        assert!((g / f - 403.428_793).abs() < 1e-5);
    }

    #[test]
    fn pulse_parameter_errors() {
        assert!(PulsePair::tanh(0.0).is_err());
        assert!(PulsePair::tanh(-1.0).is_err());
        assert!(PulsePair::sech_masked(1.0, 0.0).is_err());
        assert!(PulsePair::sech_masked(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn inverse_at_origin_is_average() {
        let (h0, h1) = four_level(1.0);
        let s = Schedule::new(PulsePair::tanh(1.0).unwrap(), h0.clone(), h1.clone(), Direction::Inverse)
            .unwrap();
        let want = (&h0 + &h1).scale(0.5);
        assert!(s.hamiltonian_at(0.0).max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn forward_asymptotics() {
        let (h0, h1) = four_level(1.0);
        let s = Schedule::new(PulsePair::tanh(1.0).unwrap(), h0.clone(), h1.clone(), Direction::Forward)
            .unwrap();
        for t in [-8.0, -12.0] {
            let (f, g) = s.pulses().evaluate(t);
            let dev = s.hamiltonian_at(t).max_abs_diff(&h0.scale(f)) / (f * h0.max_abs());
            assert!(dev <= g / f * h1.max_abs() / h0.max_abs() * (1.0 + 1e-12));
        }
        let t = 8.0;
        let (f, g) = s.pulses().evaluate(t);
        let dev = s.hamiltonian_at(t).max_abs_diff(&h1.scale(g)) / (g * h1.max_abs());
        assert!(dev <= f / g * h0.max_abs() / h1.max_abs() * (1.0 + 1e-12));
    }

    #[test]
    fn schedule_validation() {
        let (h0, h1) = four_level(1.0);
        let p = PulsePair::tanh(1.0).unwrap();
        let degenerate = ComplexMatrix::from_real_diagonal(&[1.0, 1.0, 2.0, 3.0]);
        assert!(matches!(
            Schedule::new(p, degenerate, h1.clone(), Direction::Forward),
            Err(Error::Degenerate(_))
        ));
        let mut not_diag = h0.clone();
        not_diag[(0, 1)] = C64::new(0.1, 0.0);
        assert!(Schedule::new(p, not_diag, h1.clone(), Direction::Forward).is_err());
        let mut not_circ = h1.clone();
        not_circ[(0, 2)] = C64::new(0.5, 0.0);
        not_circ[(2, 0)] = C64::new(0.5, 0.0);
        assert!(Schedule::new(p, h0.clone(), not_circ, Direction::Forward).is_err());
        let s = Schedule::new(p, h0, h1, Direction::Forward).unwrap();
        assert_eq!(s.window(), (-6.0, 6.0));
        assert_eq!(s.steps(), 4000);
        assert!(s.clone().with_window(1.0, 1.0).is_err());
        assert!(s.with_steps(0).is_err());
    }

    #[test]
    fn diagonal_schedule_has_no_coupling() {
        let (h0, _) = four_level(1.0);
        let s = Schedule::new(
            PulsePair::sech_masked(1.0, 1.0).unwrap(),
            h0,
            ComplexMatrix::zeros(4),
            Direction::Forward,
        )
        .unwrap()
        .with_steps(200)
        .unwrap();
        let report = adiabaticity_report(&s, &s.grid()).unwrap();
        assert_eq!(report.max_coupling, 0.0);
        assert!(report.margin.is_infinite());
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn trajectories_of_diagonal_schedule_follow_f() {
        let (h0, _) = four_level(2.0);
        let s = Schedule::new(
            PulsePair::sech_masked(1.0, 1.0).unwrap(),
            h0,
            ComplexMatrix::zeros(4),
            Direction::Forward,
        )
        .unwrap()
        .with_steps(50)
        .unwrap();
        let traj = eigen_trajectories(&s, &s.grid()).unwrap();
        for (t, ev) in traj.times.iter().zip(&traj.eigenvalues) {
            let (f, _) = s.pulses().evaluate(*t);
            for (e, level) in ev.iter().zip([-2.0, -2.0 / 3.0, 2.0 / 3.0, 2.0]) {
                assert!((e - level * f).abs() < 1e-15);
            }
        }
    }
}
