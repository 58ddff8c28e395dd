use thiserror::Error;

use crate::linalg::LinalgError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("degenerate spectrum: {0}")]
    Degenerate(String),
    #[error("not phase-equivalent to circulant: {0}")]
    NotPhaseEquivalent(String),
    #[error("unexpected coupling pattern: {0}")]
    Pattern(String),
    #[error("ambiguous factorization: {0}")]
    Ambiguous(String),
    #[error("integration failure: {0}")]
    Integration(String),
    #[error("branch tracking failed near t = {time:.6}: gap {gap:.3e}")]
    BranchTracking { time: f64, gap: f64 },
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input parameters or malformed matrices.
    Parameter,
    /// Unitarity drift, non-convergence, non-finite numbers.
    Numerical,
    /// Degeneracy, modulus mismatch and similar physical preconditions.
    Physics,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Linalg(LinalgError::NoConvergence { .. } | LinalgError::NonFinite) => {
                ErrorKind::Numerical
            }
            Error::Linalg(_) | Error::InvalidParameter(_) | Error::DimensionMismatch { .. } => {
                ErrorKind::Parameter
            }
            Error::Integration(_) => ErrorKind::Numerical,
            Error::Degenerate(_)
            | Error::NotPhaseEquivalent(_)
            | Error::Pattern(_)
            | Error::Ambiguous(_)
            | Error::BranchTracking { .. } => ErrorKind::Physics,
        }
    }
}
