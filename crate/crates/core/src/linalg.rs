//! Dense complex linear algebra for small Hamiltonians and propagators.
//!
//! Matrices are stored row-major. The Hermitian eigensolver is a cyclic
//! Jacobi method with complex plane rotations, which is exact enough for
//! the dimensions used here (N ≤ 64) and keeps every propagator step
//! unitary to rounding error.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64 as C64;
use thiserror::Error;

/// Relative tolerance for the Hermitian check on inputs.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Off-diagonal Frobenius mass (relative to ‖M‖_F) at which Jacobi stops.
pub const JACOBI_TOL: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Relative gap below which eigenvalues are treated as one cluster.
pub const CLUSTER_GAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e} relative to norm)")]
    NotHermitian { deviation: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal mass {off_diagonal:.3e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix must have positive dimension")]
    Empty,
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m[(k, k)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for j in 0..dim {
            for k in 0..dim {
                data.push(f(j, k));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from rows; every row must have `rows.len()` entries.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, LinalgError> {
        let dim = rows.len();
        if dim == 0 {
            return Err(LinalgError::Empty);
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(LinalgError::DimensionMismatch { left: dim, right: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (k, &d) in diag.iter().enumerate() {
            m[(k, k)] = C64::new(d, 0.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (k, &d) in diag.iter().enumerate() {
            m[(k, k)] = d;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|k| self[(k, k)]).collect()
    }

    pub fn column(&self, k: usize) -> ComplexVector {
        ComplexVector((0..self.dim).map(|j| self[(j, k)]).collect())
    }

    pub fn set_column(&mut self, k: usize, v: &ComplexVector) {
        assert_eq!(v.len(), self.dim);
        for j in 0..self.dim {
            self[(j, k)] = v[j];
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |j, k| self[(k, j)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// `a·self + b·other`, the shape of every scheduled Hamiltonian.
    pub fn linear_combination(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        assert_eq!(x.dim, y.dim);
        Self {
            dim: x.dim,
            data: x.data.iter().zip(&y.data).map(|(p, q)| p * a + q * b).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn off_diagonal_norm(&self) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.dim {
            for k in 0..self.dim {
                if j != k {
                    acc += self[(j, k)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest |M_jk − conj(M_kj)| relative to ‖M‖_F (absolute when M = 0).
    pub fn hermitian_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.dim {
            for k in j..self.dim {
                worst = worst.max((self[(j, k)] - self[(k, j)].conj()).norm());
            }
        }
        let scale = self.frobenius_norm();
        if scale > 0.0 {
            worst / scale
        } else {
            worst
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// ‖U†U − I‖_F.
    pub fn unitarity_defect(&self) -> f64 {
        (&(&self.adjoint() * self) - &Self::identity(self.dim)).frobenius_norm()
    }

    /// Largest entrywise |self − other|.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> ComplexVector {
        assert_eq!(self.dim, v.len());
        let n = self.dim;
        ComplexVector(
            (0..n)
                .map(|j| {
                    let row = &self.data[j * n..(j + 1) * n];
                    row.iter().zip(v.iter()).map(|(a, b)| a * b).sum()
                })
                .collect(),
        )
    }

    fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for j in 0..n {
            for l in 0..n {
                let a = self.data[j * n + l];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let rrow = &rhs.data[l * n..(l + 1) * n];
                let orow = &mut out.data[j * n..(j + 1) * n];
                for (o, r) in orow.iter_mut().zip(rrow) {
                    *o += a * r;
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (j, k): (usize, usize)) -> &C64 {
        &self.data[j * self.dim + k]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (j, k): (usize, usize)) -> &mut C64 {
        &mut self.data[j * self.dim + k]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for j in 0..self.dim {
            write!(f, "  [")?;
            for k in 0..self.dim {
                let z = self[(j, k)];
                write!(f, " {:+.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

/// Complex amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector(pub Vec<C64>);

impl ComplexVector {
    pub fn zeros(dim: usize) -> Self {
        Self(vec![C64::new(0.0, 0.0); dim])
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[k] = C64::new(1.0, 0.0);
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C64> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.iter().map(|z| z * s).collect())
    }
}

impl Index<usize> for ComplexVector {
    type Output = C64;
    fn index(&self, k: usize) -> &C64 {
        &self.0[k]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, k: usize) -> &mut C64 {
        &mut self.0[k]
    }
}

/// Eigen-decomposition of a Hermitian matrix: ascending real eigenvalues,
/// eigenvectors as the columns of a unitary matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> ComplexVector {
        self.vectors.column(k)
    }

    /// Smallest gap between consecutive eigenvalues (∞ for N = 1).
    pub fn min_gap(&self) -> f64 {
        self.values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// V·diag(λ)·V†.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let scaled = ComplexMatrix::from_fn(n, |j, k| self.vectors[(j, k)] * self.values[k]);
        &scaled * &self.vectors.adjoint()
    }
}

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Each rotation first removes the phase of the pivot `a_pq`, then applies
/// the real symmetric rotation that annihilates it. Iteration stops when
/// the off-diagonal Frobenius mass falls below `JACOBI_TOL·‖M‖_F`.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen, LinalgError> {
    let n = m.dim();
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    if !m.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let deviation = m.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(LinalgError::NotHermitian { deviation });
    }

    // symmetrize so rounding in the input cannot leak into the rotations
    let mut a = ComplexMatrix::from_fn(n, |j, k| {
        if j == k {
            C64::new(m[(j, j)].re, 0.0)
        } else {
            (m[(j, k)] + m[(k, j)].conj()) * 0.5
        }
    });
    let mut v = ComplexMatrix::identity(n);
    let target = JACOBI_TOL * m.frobenius_norm();

    let mut converged = false;
    let mut off = a.off_diagonal_norm();
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        off = a.off_diagonal_norm();
    }
    if !converged && off > target {
        return Err(LinalgError::NoConvergence { sweeps: JACOBI_MAX_SWEEPS, off_diagonal: off });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(x, x)].re.total_cmp(&a[(y, y)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, |j, k| v[(j, order[k])]);
    Ok(HermitianEigen { values, vectors })
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let n = a.dim();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = apq / mag; // e^{iφ}
    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let ph_conj = phase.conj();

    // G = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] acting on the (p, q) plane
    let g_pp = C64::new(c, 0.0);
    let g_pq = C64::new(s, 0.0);
    let g_qp = -ph_conj * s;
    let g_qq = ph_conj * c;

    // A ← A·G
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    // A ← G†·A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(app - t * mag, 0.0);
    a[(q, q)] = C64::new(aqq + t * mag, 0.0);

    // V ← V·G
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

/// exp(−i·H·dt) through the eigen-decomposition of `h`.
pub fn unitary_exp(h: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix, LinalgError> {
    let eig = hermitian_eigen(h)?;
    Ok(exp_from_eigen(&eig, dt))
}

/// exp(−i·H·dt) for an already decomposed H.
pub fn exp_from_eigen(eig: &HermitianEigen, dt: f64) -> ComplexMatrix {
    let n = eig.values.len();
    let phases: Vec<C64> = eig.values.iter().map(|&l| C64::from_polar(1.0, -l * dt)).collect();
    let scaled = ComplexMatrix::from_fn(n, |j, k| eig.vectors[(j, k)] * phases[k]);
    &scaled * &eig.vectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_eigenvalues() {
        let eig = hermitian_eigen(&ComplexMatrix::identity(4)).unwrap();
        assert_eq!(eig.values, vec![1.0; 4]);
        assert!(eig.vectors.unitarity_defect() < 1e-14);
    }

    #[test]
    fn pauli_x_eigenvalues() {
        let m = ComplexMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]])
            .unwrap();
        let eig = hermitian_eigen(&m).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-15);
        assert!((eig.values[1] - 1.0).abs() < 1e-15);
        assert!(eig.reconstruct().max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn ring_coupling_spectrum() {
        // 4-level ring with V = 1 + i/3 on the cyclic subdiagonal
        let v = c(1.0, 1.0 / 3.0);
        let z = c(0., 0.);
        let m = ComplexMatrix::from_rows(&[
            vec![z, v, z, v.conj()],
            vec![v.conj(), z, v, z],
            vec![z, v.conj(), z, v],
            vec![v, z, v.conj(), z],
        ])
        .unwrap();
        let eig = hermitian_eigen(&m).unwrap();
        let expected = [-2.0, -2.0 / 3.0, 2.0 / 3.0, 2.0];
        for (got, want) in eig.values.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        for k in 0..4 {
            let x = eig.vector(k);
            let r = &m.mul_vec(&x);
            let resid: f64 =
                r.iter().zip(x.iter()).map(|(a, b)| (a - b * eig.values[k]).norm_sqr()).sum();
            assert!(resid.sqrt() < 1e-10 * m.frobenius_norm());
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = ComplexMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(0., 0.), c(0., 0.)]])
            .unwrap();
        assert!(matches!(hermitian_eigen(&m), Err(LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn rejects_non_finite() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 0)] = c(f64::NAN, 0.0);
        assert_eq!(hermitian_eigen(&m).unwrap_err(), LinalgError::NonFinite);
    }

    #[test]
    fn zero_matrix_converges_immediately() {
        let eig = hermitian_eigen(&ComplexMatrix::zeros(3)).unwrap();
        assert_eq!(eig.values, vec![0.0; 3]);
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let u = unitary_exp(&ComplexMatrix::zeros(3), 1.7).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn exp_of_diagonal() {
        let w = [0.3, -1.2, 2.5];
        let dt = 0.7;
        let u = unitary_exp(&ComplexMatrix::from_real_diagonal(&w), dt).unwrap();
        let want = ComplexMatrix::from_diagonal(
            &w.iter().map(|&x| C64::from_polar(1.0, -x * dt)).collect::<Vec<_>>(),
        );
        assert!(u.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn exp_of_pauli_x_quarter_turn() {
        // exp(-i X π/2) = cos(π/2) I − i sin(π/2) X = −i X
        let x = ComplexMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]])
            .unwrap();
        let u = unitary_exp(&x, PI / 2.0).unwrap();
        let want = x.scale_complex(c(0.0, -1.0));
        assert!(u.max_abs_diff(&want) < 1e-15);
    }
}
