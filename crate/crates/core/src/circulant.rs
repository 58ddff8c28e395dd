//! Circulant matrices, their analytic spectra, and the DFT that
//! diagonalizes every one of them.
//!
//! Conventions: a circulant is fixed by its first column `c`, with entry
//! `(j, k) = c[(j − k) mod N]`. The DFT matrix has entries
//! `F[k][n] = e^{2πi·kn/N} / √N`, and column `n` of `F` is the
//! eigenvector of the circulant for `λ_n = Σ_k c_k·e^{−2πi·kn/N}`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector, CLUSTER_GAP};

/// Relative tolerance for the Hermitian-circulant checks.
pub const CIRCULANT_TOL: f64 = 1e-12;
/// Relative tolerance on the common modulus of the ring couplings.
pub const MODULUS_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct CirculantSpec {
    first_column: Vec<C64>,
}

impl CirculantSpec {
    pub fn new(first_column: Vec<C64>) -> Result<Self> {
        if first_column.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "circulant dimension must be at least 2, got {}",
                first_column.len()
            )));
        }
        if first_column.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("circulant entries must be finite".into()));
        }
        Ok(Self { first_column })
    }

    /// Reads the first column of `m` and checks every other entry against it.
    pub fn from_matrix(m: &ComplexMatrix) -> Result<Self> {
        let n = m.dim();
        let spec = Self::new(m.column(0).0)?;
        let tol = CIRCULANT_TOL * m.max_abs().max(f64::MIN_POSITIVE);
        for j in 0..n {
            for k in 0..n {
                if (m[(j, k)] - spec.coefficient(j as isize - k as isize)).norm() > tol {
                    return Err(Error::Pattern(format!(
                        "entry ({j},{k}) breaks the circulant structure"
                    )));
                }
            }
        }
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.first_column.len()
    }

    pub fn first_column(&self) -> &[C64] {
        &self.first_column
    }

    /// `c[k mod N]` for any integer `k`.
    pub fn coefficient(&self, k: isize) -> C64 {
        let n = self.dim() as isize;
        self.first_column[k.rem_euclid(n) as usize]
    }

    /// Largest |c_k − conj(c_{N−k})|, relative to max |c|.
    pub fn hermitian_violation(&self) -> f64 {
        let scale = self.first_column.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let worst = (0..self.dim())
            .map(|k| (self.coefficient(k as isize) - self.coefficient(-(k as isize)).conj()).norm())
            .fold(0.0, f64::max);
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_violation() <= CIRCULANT_TOL
    }

    pub fn materialize(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim(), |j, k| self.coefficient(j as isize - k as isize))
    }

    /// `λ_n = Σ_k c_k·exp(−2πi·kn/N)`.
    pub fn eigenvalues(&self) -> Vec<C64> {
        let n = self.dim();
        (0..n)
            .map(|m| {
                self.first_column
                    .iter()
                    .enumerate()
                    .map(|(k, &c)| c * root_of_unity(-((k * m) as i64), n))
                    .sum()
            })
            .collect()
    }

    /// Real parts of [`eigenvalues`](Self::eigenvalues); meaningful for Hermitian specs.
    pub fn real_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues().into_iter().map(|z| z.re).collect()
    }
}

/// `e^{2πi·p/N}` with the exponent reduced mod N before evaluating.
fn root_of_unity(p: i64, n: usize) -> C64 {
    let r = p.rem_euclid(n as i64) as f64;
    C64::from_polar(1.0, TAU * r / n as f64)
}

/// The unitary DFT matrix `F[k][n] = e^{2πi·kn/N} / √N`.
pub fn dft_matrix(n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("DFT dimension must be at least 2, got {n}")));
    }
    let norm = 1.0 / (n as f64).sqrt();
    Ok(ComplexMatrix::from_fn(n, |k, m| root_of_unity((k * m) as i64, n) * norm))
}

/// Column `n` of the DFT matrix.
pub fn dft_column(dim: usize, n: usize) -> ComplexVector {
    let norm = 1.0 / (dim as f64).sqrt();
    ComplexVector((0..dim).map(|k| root_of_unity((k * n) as i64, dim) * norm).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagonalizationCheck {
    /// ‖off-diagonal part of F†·C·F‖_F.
    pub off_diagonal: f64,
    /// max_n |(F†·C·F)_nn − λ_n|.
    pub diagonal_mismatch: f64,
}

/// Conjugates the materialized circulant by the DFT and measures how far
/// the result is from `diag(λ_0, …, λ_{N−1})`.
pub fn verify_dft_diagonalizes(spec: &CirculantSpec) -> DiagonalizationCheck {
    let f = dft_matrix(spec.dim()).expect("spec dimension is at least 2");
    let d = &(&f.adjoint() * &spec.materialize()) * &f;
    let lambda = spec.eigenvalues();
    let diagonal_mismatch =
        lambda.iter().enumerate().map(|(n, l)| (d[(n, n)] - l).norm()).fold(0.0, f64::max);
    DiagonalizationCheck { off_diagonal: d.off_diagonal_norm(), diagonal_mismatch }
}

/// Result of gauging a ring-coupled Hamiltonian into circulant form.
#[derive(Clone, Debug)]
pub struct GaugeReduction {
    /// β_0..β_{N−1}, with β_0 = 0.
    pub beta: Vec<f64>,
    pub spec: CirculantSpec,
    /// max entrywise |materialize(spec) − D(β)·H·D(β)†|.
    pub residual: f64,
    /// Π_k H_{(k+1) mod N, k}; invariant under diagonal phase changes.
    pub loop_product: C64,
}

impl GaugeReduction {
    /// Index pairs (n, m) of circulant eigenvalues closer than the cluster gap.
    pub fn degenerate_pairs(&self) -> Vec<(usize, usize)> {
        let lambda = self.spec.real_eigenvalues();
        let scale = lambda.iter().map(|l| l.abs()).fold(0.0, f64::max);
        let mut pairs = Vec::new();
        for a in 0..lambda.len() {
            for b in (a + 1)..lambda.len() {
                if (lambda[a] - lambda[b]).abs() <= CLUSTER_GAP * scale.max(f64::MIN_POSITIVE) {
                    pairs.push((a, b));
                }
            }
        }
        pairs
    }
}

/// `D(β) = diag(e^{iβ_k})`.
pub fn gauge_matrix(beta: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&beta.iter().map(|&b| C64::from_polar(1.0, b)).collect::<Vec<_>>())
}

/// Finds phases β such that `e^{iβ_m}·H_mn·e^{−iβ_n}` is circulant.
///
/// `h` may only couple cyclic nearest neighbours (plus a constant
/// diagonal), and every link must have the same modulus: a diagonal phase
/// change cannot alter moduli. The loop product fixes `c_1^N`; the
/// principal N-th root is taken and the phases follow by recurrence
/// around the ring. A pure sign redefinition is the β ∈ {0, π} case.
pub fn phase_equivalent_circulant(h: &ComplexMatrix) -> Result<GaugeReduction> {
    let n = h.dim();
    if n < 2 {
        return Err(Error::InvalidParameter("ring needs at least 2 sites".into()));
    }
    if !h.is_hermitian(CIRCULANT_TOL) {
        return Err(Error::InvalidParameter("Hamiltonian is not Hermitian".into()));
    }
    let scale = h.max_abs();
    let zero_tol = CIRCULANT_TOL * scale.max(f64::MIN_POSITIVE);

    for j in 0..n {
        for k in 0..n {
            let ring = j == k || (j + 1) % n == k || (k + 1) % n == j;
            if !ring && h[(j, k)].norm() > zero_tol {
                return Err(Error::Pattern(format!(
                    "entry ({j},{k}) = {:.3e} couples non-neighbouring sites",
                    h[(j, k)]
                )));
            }
        }
    }
    let c0 = h[(0, 0)];
    if let Some(k) = (1..n).find(|&k| (h[(k, k)] - c0).norm() > zero_tol) {
        return Err(Error::Pattern(format!("diagonal entry {k} differs from entry 0")));
    }

    let links: Vec<C64> = (0..n).map(|k| h[((k + 1) % n, k)]).collect();
    let moduli: Vec<f64> = links.iter().map(|z| z.norm()).collect();
    let max_mod = moduli.iter().copied().fold(0.0, f64::max);
    let min_mod = moduli.iter().copied().fold(f64::INFINITY, f64::min);

    let loop_product: C64 = links.iter().product();
    let (c1, beta) = if max_mod == 0.0 {
        (C64::new(0.0, 0.0), vec![0.0; n])
    } else {
        if (max_mod - min_mod) > MODULUS_TOL * max_mod {
            return Err(Error::NotPhaseEquivalent(format!(
                "ring coupling moduli range from {min_mod:.6e} to {max_mod:.6e}; \
                 a phase transformation cannot equalize them"
            )));
        }
        let mut arg = loop_product.arg();
        if (arg + PI).abs() < 1e-12 {
            arg = PI;
        }
        let modulus = moduli.iter().map(|m| m.ln()).sum::<f64>() / n as f64;
        let c1 = C64::from_polar(modulus.exp(), arg / n as f64);
        let mut beta = vec![0.0; n];
        for k in 0..n - 1 {
            beta[k + 1] = beta[k] + (c1 / links[k]).arg();
        }
        (c1, beta)
    };

    let mut column = vec![C64::new(0.0, 0.0); n];
    column[0] = C64::new(c0.re, 0.0);
    column[1] += c1;
    column[n - 1] += c1.conj();
    if n == 2 {
        // both links land on c_1; keep the Hermitian (real) value once
        column[1] = C64::new(c1.re, 0.0);
    }
    let spec = CirculantSpec::new(column)?;

    let d = gauge_matrix(&beta);
    let transformed = &(&d * h) * &d.adjoint();
    let residual = spec.materialize().max_abs_diff(&transformed);
    Ok(GaugeReduction { beta, spec, residual, loop_product })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigen;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ring_spec(v: C64) -> CirculantSpec {
        CirculantSpec::new(vec![c(0., 0.), v.conj(), c(0., 0.), v]).unwrap()
    }

    #[test]
    fn unit_column_is_identity() {
        let spec = CirculantSpec::new(vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        assert_eq!(spec.materialize(), ComplexMatrix::identity(4));
        for l in spec.eigenvalues() {
            assert!((l - c(1., 0.)).norm() < 1e-15);
        }
        let check = verify_dft_diagonalizes(&spec);
        assert!(check.off_diagonal < 1e-15);
    }

    #[test]
    fn ring_matrix_layout() {
        let v = c(1.0, 1.0 / 3.0);
        let z = c(0., 0.);
        let want = ComplexMatrix::from_rows(&[
            vec![z, v, z, v.conj()],
            vec![v.conj(), z, v, z],
            vec![z, v.conj(), z, v],
            vec![v, z, v.conj(), z],
        ])
        .unwrap();
        assert_eq!(ring_spec(v).materialize(), want);
        assert!(ring_spec(v).is_hermitian());
    }

    #[test]
    fn three_by_three_unrolled() {
        let (a, b, d) = (c(1., 0.), c(2., 1.), c(3., -1.));
        let m = CirculantSpec::new(vec![a, b, d]).unwrap().materialize();
        let want =
            ComplexMatrix::from_rows(&[vec![a, d, b], vec![b, a, d], vec![d, b, a]]).unwrap();
        assert_eq!(m, want);
    }

    #[test]
    fn ring_eigenvalues_in_index_order() {
        let e = 1.7;
        let spec = ring_spec(c(e, e / 3.0));
        let want = [2.0 * e, -2.0 * e / 3.0, -2.0 * e, 2.0 * e / 3.0];
        for (l, w) in spec.eigenvalues().iter().zip(want) {
            assert!((l - c(w, 0.)).norm() < 1e-12, "{l} vs {w}");
        }
        let check = verify_dft_diagonalizes(&spec);
        assert!(check.off_diagonal <= 1e-12);
        assert!(check.diagonal_mismatch <= 1e-12);
    }

    #[test]
    fn dft_small_cases() {
        let f2 = dft_matrix(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let want = ComplexMatrix::from_rows(&[vec![c(s, 0.), c(s, 0.)], vec![c(s, 0.), c(-s, 0.)]])
            .unwrap();
        assert!(f2.max_abs_diff(&want) < 1e-15);
        let f4 = dft_matrix(4).unwrap();
        assert!((f4[(1, 1)] - c(0.0, 0.5)).norm() < 1e-15);
        for n in 2..20 {
            assert!(dft_matrix(n).unwrap().unitarity_defect() < 1e-12);
        }
        assert!(dft_matrix(1).is_err());
    }

    #[test]
    fn columns_pair_with_eigenvalue_index() {
        // explicit convention check: C·F_n = λ_n·F_n
        let spec = CirculantSpec::new(vec![c(0.3, 0.), c(1.0, 2.0), c(-0.5, 0.1), c(0.2, -0.7), c(0.9, 0.)])
            .unwrap();
        let m = spec.materialize();
        for (n, l) in spec.eigenvalues().into_iter().enumerate() {
            let f = dft_column(5, n);
            let cf = m.mul_vec(&f);
            let err: f64 = cf.iter().zip(f.iter()).map(|(a, b)| (a - b * l).norm()).fold(0.0, f64::max);
            assert!(err < 1e-14);
        }
    }

    #[test]
    fn from_matrix_rejects_non_circulant() {
        let mut m = ring_spec(c(1., 0.5)).materialize();
        m[(2, 3)] += c(1e-3, 0.);
        assert!(CirculantSpec::from_matrix(&m).is_err());
        let m = ring_spec(c(1., 0.5)).materialize();
        assert_eq!(CirculantSpec::from_matrix(&m).unwrap(), ring_spec(c(1., 0.5)));
    }

    #[test]
    fn already_circulant_needs_no_gauge() {
        let v = c(1.0, 1.0 / 3.0);
        let spec = ring_spec(v);
        let red = phase_equivalent_circulant(&spec.materialize()).unwrap();
        for b in &red.beta {
            assert!(b.abs() < 1e-15);
        }
        for (a, b) in red.spec.first_column().iter().zip(spec.first_column()) {
            assert!((a - b).norm() < 1e-15);
        }
        assert!(red.residual <= 1e-15);
    }

    #[test]
    fn sign_flip_is_a_pi_gauge() {
        // flipping the sign of one amplitude turns a ring with one negative
        // link pair into the uniform ring
        let mut h = ring_spec(c(1.0, 0.0)).materialize();
        let d = gauge_matrix(&[0.0, PI, 0.0, 0.0]);
        h = &(&d * &h) * &d.adjoint();
        let red = phase_equivalent_circulant(&h).unwrap();
        assert!(red.residual < 1e-14);
        let eig = hermitian_eigen(&h).unwrap();
        let mut lam = red.spec.real_eigenvalues();
        lam.sort_by(f64::total_cmp);
        for (a, b) in lam.iter().zip(&eig.values) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pattern_errors() {
        let mut h = ComplexMatrix::zeros(5);
        h[(0, 2)] = c(1., 0.);
        h[(2, 0)] = c(1., 0.);
        assert!(matches!(phase_equivalent_circulant(&h), Err(Error::Pattern(_))));
        let mut h = ring_spec(c(1., 0.)).materialize();
        h[(1, 1)] = c(0.5, 0.);
        assert!(matches!(phase_equivalent_circulant(&h), Err(Error::Pattern(_))));
    }

    #[test]
    fn modulus_mismatch_error() {
        let mut h = ring_spec(c(1., 0.)).materialize();
        h[(1, 0)] = c(2., 0.);
        h[(0, 1)] = c(2., 0.);
        assert!(matches!(phase_equivalent_circulant(&h), Err(Error::NotPhaseEquivalent(_))));
    }
}
