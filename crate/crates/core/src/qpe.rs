//! Phase estimation on top of the adiabatically synthesized inverse QFT.
//!
//! Only the first register is modelled: the state left there by the
//! Hadamard and controlled-U stages, `2^{−r/2}·Σ_k e^{2πi·kφ}|k⟩`, is
//! prepared directly and handed to the inverse schedule.

use std::f64::consts::TAU;

use num_complex::Complex64 as C64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::permutation::Permutation;
use crate::propagator::{
    evolve_with, factor_phased_dft, phased_dft, phased_inverse_dft, predict_permutation,
    EvolveOptions, PhasedDftFactorization,
};
use crate::schedule::{Direction, Schedule};

/// Largest register handled; 2^r amplitudes are stored densely.
pub const MAX_REGISTER_QUBITS: u32 = 16;
const EXACT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseValue {
    phi: f64,
    qubits: u32,
}

impl PhaseValue {
    pub fn new(phi: f64, qubits: u32) -> Result<Self> {
        if !(phi.is_finite() && (0.0..1.0).contains(&phi)) {
            return Err(Error::InvalidParameter(format!("phase must lie in [0, 1), got {phi}")));
        }
        if qubits == 0 || qubits > MAX_REGISTER_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "register size must be 1..={MAX_REGISTER_QUBITS} qubits, got {qubits}"
            )));
        }
        Ok(Self { phi, qubits })
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    /// True when φ·2^r is an integer.
    pub fn is_exact(&self) -> bool {
        let scaled = self.phi * self.dim() as f64;
        (scaled - scaled.round()).abs() <= EXACT_TOL * self.dim() as f64
    }

    pub fn expansion(&self) -> BitExpansion {
        to_bits(self.phi, self.qubits)
    }
}

/// An r-bit binary fraction `0.φ1φ2…φr`, most significant bit first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitExpansion {
    pub bits: Vec<u8>,
    pub exact: bool,
}

impl BitExpansion {
    /// The register index `Σ φ_j·2^{r−j}`.
    pub fn index(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn value(&self) -> f64 {
        binary_fraction(&self.bits)
    }
}

/// `Σ_j φ_j·2^{−j}`.
pub fn binary_fraction(bits: &[u8]) -> f64 {
    bits.iter().enumerate().map(|(j, &b)| b as f64 * 0.5f64.powi(j as i32 + 1)).sum()
}

/// Bits of the register index `k` (MSB first).
pub fn index_bits(k: usize, qubits: u32) -> Vec<u8> {
    (0..qubits).rev().map(|j| ((k >> j) & 1) as u8).collect()
}

/// Nearest r-bit fraction to `phi`, measured around the unit circle (a
/// value just below 1 rounds to 0).
pub fn to_bits(phi: f64, qubits: u32) -> BitExpansion {
    let dim = 1usize << qubits;
    let scaled = phi * dim as f64;
    let nearest = scaled.round();
    let exact = (scaled - nearest).abs() <= EXACT_TOL * dim as f64;
    let index = (nearest as i64).rem_euclid(dim as i64) as usize;
    BitExpansion { bits: index_bits(index, qubits), exact }
}

/// `2^{−r/2}·Σ_k e^{2πi·kφ}|k⟩`.
pub fn prepare_register_state(phase: &PhaseValue) -> ComplexVector {
    let dim = phase.dim();
    let norm = 1.0 / (dim as f64).sqrt();
    ComplexVector(
        (0..dim)
            .map(|k| {
                // reduce kφ mod 1 first to keep the argument small
                let turns = (k as f64 * phase.phi).fract();
                C64::from_polar(norm, TAU * turns)
            })
            .collect(),
    )
}

/// `Σ_n e^{−iα_n}|σ(n)⟩⟨F_n|`: the inverse QFT with adiabatic phases and
/// basis renumbering.
pub fn ideal_phased_inverse_qft(alpha: &[f64], sigma: &Permutation) -> Result<ComplexMatrix> {
    check_oracle_args(alpha, sigma)?;
    Ok(phased_inverse_dft(alpha, sigma))
}

/// `|n⟩ ↦ e^{iα_n}·F_{σ(n)}`.
pub fn ideal_phased_qft(alpha: &[f64], sigma: &Permutation) -> Result<ComplexMatrix> {
    check_oracle_args(alpha, sigma)?;
    Ok(phased_dft(alpha, sigma))
}

fn check_oracle_args(alpha: &[f64], sigma: &Permutation) -> Result<()> {
    if alpha.len() != sigma.len() {
        return Err(Error::DimensionMismatch { expected: sigma.len(), found: alpha.len() });
    }
    if alpha.len() < 2 {
        return Err(Error::InvalidParameter("oracle dimension must be at least 2".into()));
    }
    if alpha.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidParameter("phases must be finite".into()));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct QpeResult {
    pub phase: PhaseValue,
    pub expansion: BitExpansion,
    /// |amplitude|² of each measured (H0-basis) outcome.
    pub distribution: Vec<f64>,
    /// `relabeled_distribution[σ(m)] = distribution[m]`: register index order.
    pub relabeled_distribution: Vec<f64>,
    pub top_outcome: usize,
    pub top_bits: Vec<u8>,
    /// Measured basis state that carries the expected bits.
    pub target_state: usize,
    /// `(t, |⟨target|ψ(t)⟩|²)`.
    pub fidelity_trace: Vec<(f64, f64)>,
    pub final_fidelity: f64,
    /// Phase of the target amplitude, the `−α(φ)` of the readout.
    pub target_phase: f64,
    /// Outcome distribution of the ideal phased oracle for the same input.
    pub oracle_distribution: Vec<f64>,
    /// Total variation between `distribution` and `oracle_distribution`.
    pub total_variation: f64,
    /// Factorization of the simulated inverse transform, when unambiguous.
    pub factorization: Option<PhasedDftFactorization>,
}

/// Evolves the register state under the inverse version of `schedule`
/// and reads out the phase.
///
/// The measured basis is the H0 basis; a measured state `m` is relabeled
/// to register index `σ(m)` with `σ` from
/// [`predict_permutation`], undoing the renumbering of the adiabatic map.
pub fn run_qpe(phase: &PhaseValue, schedule: &Schedule) -> Result<QpeResult> {
    if schedule.dim() != phase.dim() {
        return Err(Error::DimensionMismatch { expected: schedule.dim(), found: phase.dim() });
    }
    let schedule = schedule.clone().with_direction(Direction::Inverse);
    let sigma = predict_permutation(schedule.h0(), schedule.h1())?;
    let expansion = phase.expansion();
    let target_state = sigma.inverse().apply(expansion.index());

    let psi0 = prepare_register_state(phase);
    let run = evolve_with(&schedule, EvolveOptions { sample_stride: 1, convergence_check: false })?;
    let fidelity_trace: Vec<(f64, f64)> = run
        .times
        .iter()
        .zip(&run.samples)
        .map(|(&t, u)| (t, u.mul_vec(&psi0)[target_state].norm_sqr()))
        .collect();
    let psi = run.final_propagator.mul_vec(&psi0);

    let factorization = factor_phased_dft(&run.final_propagator, Direction::Inverse).ok();
    let alpha = factorization
        .as_ref()
        .filter(|f| f.sigma == sigma.inverse())
        .map(|f| f.alpha.clone())
        .unwrap_or_else(|| vec![0.0; phase.dim()]);
    let oracle = ideal_phased_inverse_qft(&alpha, &sigma.inverse())?;
    let oracle_distribution = oracle.mul_vec(&psi0).probabilities();

    let distribution = psi.probabilities();
    let total_variation = total_variation(&distribution, &oracle_distribution);
    let mut result = summarize(phase, expansion, distribution, &sigma, target_state);
    result.final_fidelity = fidelity_trace.last().map(|p| p.1).unwrap_or(0.0);
    result.fidelity_trace = fidelity_trace;
    result.target_phase = psi[target_state].arg();
    result.oracle_distribution = oracle_distribution;
    result.total_variation = total_variation;
    result.factorization = factorization;
    Ok(result)
}

/// Phase estimation with the exact phased inverse QFT in place of the
/// simulation. `sigma` maps register index to measured state, as in the
/// inverse factorization.
pub fn run_qpe_oracle(phase: &PhaseValue, alpha: &[f64], sigma_inverse: &Permutation) -> Result<QpeResult> {
    if alpha.len() != phase.dim() {
        return Err(Error::DimensionMismatch { expected: phase.dim(), found: alpha.len() });
    }
    let oracle = ideal_phased_inverse_qft(alpha, sigma_inverse)?;
    let psi = oracle.mul_vec(&prepare_register_state(phase));
    let sigma = sigma_inverse.inverse();
    let expansion = phase.expansion();
    let target_state = sigma_inverse.apply(expansion.index());
    let distribution = psi.probabilities();
    let mut result = summarize(phase, expansion, distribution.clone(), &sigma, target_state);
    result.final_fidelity = distribution[target_state];
    result.target_phase = psi[target_state].arg();
    result.oracle_distribution = distribution;
    Ok(result)
}

fn summarize(
    phase: &PhaseValue,
    expansion: BitExpansion,
    distribution: Vec<f64>,
    sigma: &Permutation,
    target_state: usize,
) -> QpeResult {
    let mut relabeled = vec![0.0; distribution.len()];
    for (m, &p) in distribution.iter().enumerate() {
        relabeled[sigma.apply(m)] = p;
    }
    let top_outcome = argmax(&relabeled);
    QpeResult {
        phase: *phase,
        top_bits: index_bits(top_outcome, phase.qubits()),
        expansion,
        relabeled_distribution: relabeled,
        top_outcome,
        target_state,
        fidelity_trace: Vec::new(),
        final_fidelity: 0.0,
        target_phase: 0.0,
        oracle_distribution: distribution.clone(),
        total_variation: 0.0,
        distribution,
        factorization: None,
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for k in 1..values.len() {
        if values[k] > values[best] {
            best = k;
        }
    }
    best
}

/// ½·Σ|p − q|.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Shot counts drawn from `distribution` with a seeded generator.
pub fn sample_counts(distribution: &[f64], shots: usize, seed: u64) -> Result<Vec<usize>> {
    let weights = WeightedIndex::new(distribution.iter().map(|p| p.max(0.0)))
        .map_err(|e| Error::InvalidParameter(format!("cannot sample distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0; distribution.len()];
    for _ in 0..shots {
        counts[weights.sample(&mut rng)] += 1;
    }
    Ok(counts)
}
