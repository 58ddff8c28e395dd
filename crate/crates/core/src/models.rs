//! Hamiltonian builders for the level schemes that realize a circulant
//! coupling.
//!
//! Energies are in units of 1/T with ħ = 1, so a Rabi frequency Ω enters
//! the Hamiltonian as Ω/2.

use num_complex::Complex64 as C64;

use crate::circulant::{phase_equivalent_circulant, CirculantSpec, GaugeReduction};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, CLUSTER_GAP};

/// Four levels on a ring: `H0 = diag(−E, −E/3, E/3, E)` and a Hermitian
/// circulant `H1` with first column `(0, V*, 0, V)`.
///
/// The diamond scheme (J′=0 ↔ J″=1 ↔ J‴=0) has the same ring topology and
/// is described by this model too.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourLevelModel {
    energy: f64,
    coupling: C64,
}

/// A coupling that leaves two or more circulant eigenvalues equal.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumWarning {
    pub eigenvalues: Vec<f64>,
    pub coincident: Vec<(usize, usize)>,
}

impl FourLevelModel {
    pub fn new(energy: f64, coupling: C64) -> Result<Self> {
        if !(energy.is_finite() && energy > 0.0) {
            return Err(Error::InvalidParameter(format!("E must be positive, got {energy}")));
        }
        if !(coupling.re.is_finite() && coupling.im.is_finite()) {
            return Err(Error::InvalidParameter("V must be finite".into()));
        }
        Ok(Self { energy, coupling })
    }

    /// The operating point used throughout: `V = E(1 + i/3)`.
    pub fn standard(energy: f64) -> Result<Self> {
        Self::new(energy, C64::new(energy, energy / 3.0))
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn coupling(&self) -> C64 {
        self.coupling
    }

    pub fn levels(&self) -> [f64; 4] {
        let e = self.energy;
        [-e, -e / 3.0, e / 3.0, e]
    }

    pub fn h0(&self) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&self.levels())
    }

    pub fn circulant_spec(&self) -> CirculantSpec {
        let z = C64::new(0.0, 0.0);
        CirculantSpec::new(vec![z, self.coupling.conj(), z, self.coupling])
            .expect("four entries")
    }

    pub fn h1(&self) -> ComplexMatrix {
        self.circulant_spec().materialize()
    }

    pub fn hamiltonians(&self) -> (ComplexMatrix, ComplexMatrix) {
        (self.h0(), self.h1())
    }

    /// `λ_n = 2·Re(V·iⁿ)`.
    pub fn circulant_eigenvalues(&self) -> Vec<f64> {
        self.circulant_spec().real_eigenvalues()
    }

    /// Set when the circulant spectrum has coincident eigenvalues, which
    /// happens for V = 0 and for purely real or imaginary V.
    pub fn spectrum_warning(&self) -> Option<SpectrumWarning> {
        let eigenvalues = self.circulant_eigenvalues();
        let coincident = coincident_pairs(&eigenvalues);
        (!coincident.is_empty()).then_some(SpectrumWarning { eigenvalues, coincident })
    }
}

fn coincident_pairs(values: &[f64]) -> Vec<(usize, usize)> {
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut pairs = Vec::new();
    for a in 0..values.len() {
        for b in (a + 1)..values.len() {
            if (values[a] - values[b]).abs() <= CLUSTER_GAP * scale {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// Zeeman splitting and Stark shifts that place the four magnetic
/// sublevels of a J′=½ ↔ J″=½ transition at prescribed energies.
///
/// The sublevel energies are `∓E_Z/2 + E_gS` (ground, m = ∓½) and
/// `∓E_Z/2 + E_eS` (excited, m = ∓½).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftSolution {
    pub zeeman: f64,
    pub ground_stark: f64,
    pub excited_stark: f64,
}

impl ShiftSolution {
    /// Level energies in the order (g,−½), (g,+½), (e,−½), (e,+½).
    pub fn level_energies(&self) -> [f64; 4] {
        let half = 0.5 * self.zeeman;
        [
            -half + self.ground_stark,
            half + self.ground_stark,
            -half + self.excited_stark,
            half + self.excited_stark,
        ]
    }

    /// Signed residual of each of the four equations against `targets`.
    pub fn residuals(&self, targets: &[f64; 4]) -> [f64; 4] {
        let levels = self.level_energies();
        [0, 1, 2, 3].map(|k| levels[k] - targets[k])
    }
}

/// Solves the four level equations for `(E_Z, E_gS, E_eS)`.
///
/// Three unknowns, four equations: the least-squares solution averages the
/// two splittings and takes each Stark shift as its level-pair midpoint.
/// When the targets are consistent (equal splittings) it is exact.
pub fn solve_level_shifts_for(targets: &[f64; 4]) -> ShiftSolution {
    let [g_lo, g_hi, e_lo, e_hi] = *targets;
    ShiftSolution {
        zeeman: 0.5 * ((g_hi - g_lo) + (e_hi - e_lo)),
        ground_stark: 0.5 * (g_lo + g_hi),
        excited_stark: 0.5 * (e_lo + e_hi),
    }
}

/// Shifts that realize `diag(−E, −E/3, E/3, E)`: `E_Z = E_eS = −E_gS = 2E/3`.
pub fn solve_level_shifts(energy: f64) -> ShiftSolution {
    solve_level_shifts_for(&[-energy, -energy / 3.0, energy / 3.0, energy])
}

/// The six magnetic sublevels of a J′=1 ↔ J″=1 transition, ordered
/// |m′=−1⟩, |m″=0⟩, |m′=1⟩, |m″=1⟩, |m′=0⟩, |m″=−1⟩.
///
/// `omega1` drives Δm = ±1 links and `omega2` the Δm = 0 links; the
/// m′=0 ↔ m″=0 transition is absent, which closes the chain into a ring.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SixLevelModel {
    pub omega1: C64,
    pub omega2: C64,
}

impl SixLevelModel {
    pub fn new(omega1: C64, omega2: C64) -> Self {
        Self { omega1, omega2 }
    }

    pub fn h1(&self) -> ComplexMatrix {
        let z = C64::new(0.0, 0.0);
        let (a, b) = (self.omega1, self.omega2);
        let (ac, bc) = (a.conj(), b.conj());
        #[rustfmt::skip]
        let rows = vec![
            vec![z,   -a,  z,   z,   z,   -b],
            vec![-ac, z,   ac,  z,   z,   z ],
            vec![z,   a,   z,   b,   z,   z ],
            vec![z,   z,   bc,  z,   -ac, z ],
            vec![z,   z,   z,   -a,  z,   a ],
            vec![-bc, z,   z,   z,   ac,  z ],
        ];
        ComplexMatrix::from_rows(&rows).expect("6x6").scale(0.5)
    }

    /// Phases that turn the ring into a circulant; fails unless |Ω1| = |Ω2|.
    pub fn gauge_reduction(&self) -> Result<GaugeReduction> {
        phase_equivalent_circulant(&self.h1())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigen;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn four_level_layout() {
        let m = FourLevelModel::new(1.0, c(1.0, 1.0 / 3.0)).unwrap();
        let h1 = m.h1();
        assert_eq!(h1[(0, 1)], c(1.0, 1.0 / 3.0));
        assert_eq!(h1[(1, 0)], c(1.0, -1.0 / 3.0));
        assert_eq!(h1[(0, 3)], c(1.0, -1.0 / 3.0));
        assert_eq!(h1[(0, 2)], c(0.0, 0.0));
        assert!(m.circulant_spec().is_hermitian());
        assert_eq!(m.h0().diagonal()[1], c(-1.0 / 3.0, 0.0));
    }

    #[test]
    fn four_level_spectrum() {
        let e = 2.5;
        let m = FourLevelModel::standard(e).unwrap();
        let want = [2.0 * e, -2.0 * e / 3.0, -2.0 * e, 2.0 * e / 3.0];
        for (l, w) in m.circulant_eigenvalues().iter().zip(want) {
            assert!((l - w).abs() < 1e-12);
        }
        assert!(m.spectrum_warning().is_none());
    }

    #[test]
    fn real_coupling_warns() {
        let w = FourLevelModel::new(1.0, c(0.7, 0.0)).unwrap().spectrum_warning().unwrap();
        assert!(w.coincident.contains(&(1, 3)));
        assert!(w.eigenvalues[1].abs() < 1e-15 && w.eigenvalues[3].abs() < 1e-15);
        let w = FourLevelModel::new(1.0, c(0.0, 0.0)).unwrap().spectrum_warning().unwrap();
        assert_eq!(w.coincident.len(), 6);
    }

    #[test]
    fn four_level_rejects_bad_energy() {
        assert!(FourLevelModel::new(0.0, c(1.0, 0.0)).is_err());
        assert!(FourLevelModel::new(-1.0, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn level_shifts_scaled() {
        let s = solve_level_shifts(3.0);
        assert_eq!((s.zeeman, s.ground_stark, s.excited_stark), (2.0, -2.0, 2.0));
        let s = solve_level_shifts(0.0);
        assert_eq!((s.zeeman, s.ground_stark, s.excited_stark), (0.0, 0.0, 0.0));
    }

    #[test]
    fn level_shift_first_equation() {
        for e in [0.1, 1.0, 7.3, 1e6, 3.0e-4] {
            let s = solve_level_shifts(e);
            assert!((-0.5 * s.zeeman + s.ground_stark + e).abs() <= 1e-15 * e);
        }
    }

    #[test]
    fn six_level_entries() {
        let (a, b) = (c(1.0, 0.5), c(-0.3, 2.0));
        let h = SixLevelModel::new(a, b).h1();
        assert_eq!(h[(0, 1)], -a / 2.0);
        assert_eq!(h[(1, 0)], -a.conj() / 2.0);
        assert_eq!(h[(0, 5)], -b / 2.0);
        assert_eq!(h[(5, 0)], -b.conj() / 2.0);
        for (j, k) in [(0, 2), (1, 3), (2, 4)] {
            assert_eq!(h[(j, k)], c(0.0, 0.0));
        }
        assert!(h.is_hermitian(0.0));
    }

    #[test]
    fn six_level_equal_real_rabi() {
        let omega = 1.4;
        let model = SixLevelModel::new(c(omega, 0.0), c(omega, 0.0));
        let red = model.gauge_reduction().unwrap();
        // links (−Ω, Ω, Ω, −Ω, Ω, −Ω)/2 multiply to −Ω⁶/64
        assert!((red.loop_product - c(-omega.powi(6) / 64.0, 0.0)).norm() < 1e-14);
        let c1 = red.spec.first_column()[1];
        assert!((c1 - C64::from_polar(omega / 2.0, PI / 6.0)).norm() < 1e-14);
        assert!(red.residual <= 1e-12);
    }

    #[test]
    fn six_level_spectrum_is_gauge_invariant_and_degenerate() {
        let model = SixLevelModel::new(C64::from_polar(1.0, 0.4), C64::from_polar(1.0, -1.1));
        let red = model.gauge_reduction().unwrap();
        assert!(red.residual <= 1e-12);
        let mut lam = red.spec.real_eigenvalues();
        lam.sort_by(f64::total_cmp);
        let eig = hermitian_eigen(&model.h1()).unwrap();
        for (a, b) in lam.iter().zip(&eig.values) {
            assert!((a - b).abs() < 1e-10);
        }
        assert_eq!(red.degenerate_pairs().len(), 3);
    }

    #[test]
    fn six_level_unequal_moduli() {
        let model = SixLevelModel::new(c(1.0, 0.0), c(1.5, 0.0));
        assert!(matches!(model.gauge_reduction(), Err(Error::NotPhaseEquivalent(_))));
    }
}
