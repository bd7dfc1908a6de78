use serde::{Deserialize, Serialize};

use super::params::{block_state, ProtocolParams, QubitAmplitudes, Representation};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::quantum::{DensityMatrix, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

/// Uniform mixture over fixed-parity bit strings of product block projectors.
#[derive(Debug, Clone)]
pub struct ParityMixture {
    pub party: Party,
    pub parity: u8,
    /// First round covered; the strings span rounds `start..=m`.
    pub start: usize,
    pub rho: DensityMatrix,
}

/// `ρ_C^b(k)`: mixture over strings of length `m − k + 1` with parity `b`.
///
/// Both parties' mixtures have the same matrix; the tag records whose qubits
/// it describes.
pub fn parity_mixture(party: Party, b: u8, k: usize, p: &ProtocolParams, compressed: bool) -> Result<ParityMixture> {
    if k == 0 || k > p.m {
        return Err(Error::InvalidArgument(format!("start round {k} outside 1..={}", p.m)));
    }
    let q = p.string_length(k)?;
    let repr = if compressed { Representation::Compressed } else { Representation::Full };
    let rho = parity_mixture_of_length(q, b, p.amplitudes(), p.n, repr)?;
    Ok(ParityMixture { party, parity: b & 1, start: k, rho })
}

/// Parity mixture over strings of length `q ≥ 1` built by enumerating every
/// string of the requested parity.
pub fn parity_mixture_of_length(
    q: usize,
    b: u8,
    amps: QubitAmplitudes,
    n: usize,
    repr: Representation,
) -> Result<DensityMatrix> {
    let blocks = [block_state(0, amps, n, repr), block_state(1, amps, n, repr)];
    parity_mixture_from_blocks(q, b, &blocks)
}

/// Same, for arbitrary single-bit block states.
pub fn parity_mixture_from_blocks(q: usize, b: u8, blocks: &[StateVector; 2]) -> Result<DensityMatrix> {
    if q == 0 {
        return Err(Error::InvalidArgument("parity strings need at least one bit".into()));
    }
    if q > 16 {
        return Err(Error::InvalidArgument(format!("string length {q} is too large for a dense mixture")));
    }
    let strings: Vec<u32> = (0..1u32 << q).filter(|s| (s.count_ones() & 1) as u8 == b & 1).collect();
    let kets: Vec<StateVector> = strings.iter().map(|&s| product_ket(s, q, blocks)).collect();
    let dim = kets[0].len();
    let mut columns = CMatrix::zeros(dim, kets.len());
    for (k, ket) in kets.iter().enumerate() {
        columns.set_column(k, ket.amplitudes());
    }
    let rho = (&columns * columns.adjoint()).unscale(kets.len() as f64);
    DensityMatrix::new(rho, kets[0].dims().to_vec())
}

/// `⊗ⱼ blocks[bit j of s]`, most significant bit first.
pub fn product_ket(s: u32, q: usize, blocks: &[StateVector; 2]) -> StateVector {
    let bit = |j: usize| ((s >> (q - 1 - j)) & 1) as usize;
    (1..q).fold(blocks[bit(0)].clone(), |acc, j| acc.tensor(&blocks[bit(j)]))
}
