//! Distinguishability of two density matrices: trace distance, optimal
//! two-state discrimination, fidelity, and the purification picture behind it.

use super::povm::Povm;
use super::state::{check_factors, DensityMatrix, StateVector};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, C64};

/// Eigenvalues of `ρ₀ − ρ₁` within this distance of zero go to outcome `0`.
pub const HELSTROM_TIE_TOLERANCE: f64 = 1e-12;

fn same_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

/// `½ tr|ρ₀ − ρ₁|`.
pub fn trace_distance(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<f64> {
    same_dims(rho0, rho1)?;
    let diff = rho0.matrix() - rho1.matrix();
    Ok((0.5 * linalg::trace_norm_hermitian(&diff)).clamp(0.0, 1.0))
}

/// Minimum error probability for telling `ρ₀` from `ρ₁` given equal priors,
/// together with the measurement attaining it.
///
/// The POVM projects onto the non-negative eigenspace of `ρ₀ − ρ₁` (outcome
/// `"0"`) and its complement (outcome `"1"`).
pub fn helstrom_pe(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<(f64, Povm)> {
    same_dims(rho0, rho1)?;
    let diff = rho0.matrix() - rho1.matrix();
    let (values, vectors) = linalg::hermitian_eigen(&diff);
    let n = diff.nrows();
    let mut e0 = CMatrix::zeros(n, n);
    let mut norm = 0.0;
    for (k, &lambda) in values.iter().enumerate() {
        norm += lambda.abs();
        if lambda > -HELSTROM_TIE_TOLERANCE {
            let v = vectors.column(k);
            e0 += v * v.adjoint();
        }
    }
    let e1 = linalg::identity(n) - &e0;
    let povm = Povm::projective(vec![("0".into(), e0), ("1".into(), e1)])?;
    let pe = (0.5 - 0.25 * norm).clamp(0.0, 0.5);
    Ok((pe, povm))
}

/// `tr √(√ρ₀ ρ₁ √ρ₀)`, clamped to `[0, 1]`.
///
/// Evaluated as the sum of singular values of `√ρ₀ √ρ₁`, which equals the
/// trace above without taking square roots of near-zero eigenvalues.
pub fn fidelity(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<f64> {
    same_dims(rho0, rho1)?;
    let product = linalg::psd_sqrt(rho0.matrix()) * linalg::psd_sqrt(rho1.matrix());
    Ok(linalg::nuclear_norm(&product).clamp(0.0, 1.0))
}

/// Maximal squared overlap of purifications, i.e. `fidelity²`.
pub fn transition_probability(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<f64> {
    let f = fidelity(rho0, rho1)?;
    Ok(f * f)
}

/// All four measures for one pair of states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistinguishabilityReport {
    pub pe: f64,
    pub k: f64,
    pub fid: f64,
    pub trans: f64,
}

impl DistinguishabilityReport {
    pub fn compute(rho0: &DensityMatrix, rho1: &DensityMatrix) -> Result<Self> {
        let k = trace_distance(rho0, rho1)?;
        let fid = fidelity(rho0, rho1)?;
        Ok(DistinguishabilityReport { pe: 0.5 - 0.5 * k, k, fid, trans: fid * fid })
    }
}

/// `Σᵢ √λᵢ |vᵢ⟩|i⟩` with an ancilla as large as the input. Noise-level
/// eigenvalues are dropped, as in [`fidelity`].
pub fn purify(rho: &DensityMatrix) -> StateVector {
    let (values, vectors) = linalg::hermitian_eigen(rho.matrix());
    let n = rho.dim();
    let floor = linalg::spectral_noise_floor(&values);
    let mut amps = CVector::zeros(n * n);
    for (i, &lambda) in values.iter().enumerate() {
        if lambda <= floor {
            continue;
        }
        let w = lambda.sqrt();
        for r in 0..n {
            amps[r * n + i] += vectors[(r, i)] * w;
        }
    }
    let mut dims = rho.dims().to_vec();
    dims.push(n);
    StateVector::normalized(amps, dims).expect("a density matrix has unit trace")
}

/// The optimal local unitary of Uhlmann's theorem.
#[derive(Debug, Clone)]
pub struct UhlmannResult {
    /// Acts on the free factors, taken in ascending order.
    pub unitary: CMatrix,
    /// `⟨ψ₁|(I ⊗ U)|ψ₀⟩` at the optimum.
    pub overlap_amplitude: C64,
    /// `|overlap_amplitude|²`.
    pub u: f64,
}

/// Unitary on the `free` factors maximizing `|⟨ψ₁|(I ⊗ U)|ψ₀⟩|`.
///
/// Built as the unitary factor of the cross-overlap matrix
/// `M[i][j] = ⟨ψ₁|(I ⊗ |j⟩⟨i|)|ψ₀⟩`. When `M` is rank deficient any completion
/// is optimal; the one returned comes from the SVD.
pub fn uhlmann_unitary(psi0: &StateVector, psi1: &StateVector, free: &[usize]) -> Result<UhlmannResult> {
    if psi0.dims() != psi1.dims() {
        return Err(Error::DimensionMismatch { expected: psi0.len(), found: psi1.len() });
    }
    let mut free = free.to_vec();
    free.sort_unstable();
    check_factors(psi0.dims(), &free)?;
    let a0 = psi0.bipartite_matrix(&free)?;
    let a1 = psi1.bipartite_matrix(&free)?;
    let cross = a0.transpose() * a1.conjugate();
    let (unitary, _) = linalg::maximizing_unitary(&cross);
    let rotated = psi0.apply_unitary(&unitary, &free)?;
    let overlap_amplitude = psi1.inner(&rotated)?;
    let u = overlap_amplitude.norm_sqr().min(1.0);
    Ok(UhlmannResult { unitary, overlap_amplitude, u })
}
