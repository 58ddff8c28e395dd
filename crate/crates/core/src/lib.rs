//! Adiabatic synthesis of the quantum Fourier transform.
//!
//! A Hamiltonian `H(t) = f(t)·H0 + g(t)·H1` that interpolates between a
//! non-degenerate diagonal `H0` and a Hermitian circulant `H1` carries
//! each computational basis state onto a Fourier basis vector, up to a
//! phase and a renumbering. This crate builds such schedules, integrates
//! them, factors the resulting propagator and runs phase estimation on
//! top of the inverse map.

pub mod circulant;
pub mod error;
pub mod linalg;
pub mod models;
pub mod permutation;
pub mod propagator;
pub mod qpe;
pub mod schedule;

pub use num_complex::Complex64 as C64;

pub use circulant::{
    dft_column, dft_matrix, gauge_matrix, phase_equivalent_circulant, verify_dft_diagonalizes,
    CirculantSpec, GaugeReduction,
};
pub use error::{Error, ErrorKind, Result};
pub use linalg::{hermitian_eigen, unitary_exp, ComplexMatrix, ComplexVector, HermitianEigen, LinalgError};
pub use models::{solve_level_shifts, FourLevelModel, SixLevelModel};
pub use permutation::Permutation;
pub use propagator::{
    dynamical_phase_prediction, evolve, evolve_with, factor_phased_dft, predict_permutation,
    EvolutionResult, EvolveOptions, PhasedDftFactorization,
};
pub use qpe::{run_qpe, run_qpe_oracle, PhaseValue, QpeResult};
pub use schedule::{
    adiabaticity_report, eigen_trajectories, Direction, PulsePair, Schedule,
};
