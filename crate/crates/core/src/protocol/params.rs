use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::StateVector;

const UNIT_TOLERANCE: f64 = 1e-12;

/// Real amplitudes `(c, s)` of the single-qubit states `ψ(b) = c|0⟩ ± s|1⟩`.
///
/// Unlike [`ProtocolParams`], degenerate values (`s = 0` or `c = 0`) are
/// allowed here so that limiting cases can be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitAmplitudes {
    pub c: f64,
    pub s: f64,
}

impl QubitAmplitudes {
    pub fn new(c: f64, s: f64) -> Result<Self> {
        if !(c.is_finite() && s.is_finite()) || c < 0.0 || s < 0.0 || (c * c + s * s - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidParams(format!("amplitudes ({c}, {s}) are not a non-negative unit pair")));
        }
        Ok(QubitAmplitudes { c, s })
    }

    pub fn from_c2(c2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c2) {
            return Err(Error::InvalidParams(format!("c² = {c2} is outside [0, 1]")));
        }
        Self::new(c2.sqrt(), (1.0 - c2).sqrt())
    }

    /// `⟨ψ(0)|ψ(1)⟩ = c² − s²`.
    pub fn overlap(&self) -> f64 {
        self.c * self.c - self.s * self.s
    }
}

/// Public protocol parameters plus the round at which the attack strikes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub c: f64,
    pub s: f64,
    /// Qubits per committed bit.
    pub n: usize,
    /// Number of bit rounds.
    pub m: usize,
    /// Attack round, `1 ≤ l ≤ m`.
    pub l: usize,
}

impl ProtocolParams {
    pub fn new(c: f64, s: f64, n: usize, m: usize, l: usize) -> Result<Self> {
        let p = ProtocolParams { c, s, n, m, l };
        p.validate()?;
        Ok(p)
    }

    pub fn from_c2(c2: f64, n: usize, m: usize, l: usize) -> Result<Self> {
        if !(c2 > 0.0 && c2 < 1.0) {
            return Err(Error::InvalidParams(format!("c² = {c2} must lie strictly inside (0, 1)")));
        }
        Self::new(c2.sqrt(), (1.0 - c2).sqrt(), n, m, l)
    }

    pub fn validate(&self) -> Result<()> {
        let amps = QubitAmplitudes::new(self.c, self.s)?;
        if amps.c <= 0.0 || amps.s <= 0.0 {
            return Err(Error::InvalidParams("c and s must both be positive".into()));
        }
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidParams("n and m must be at least 1".into()));
        }
        if self.l == 0 || self.l > self.m {
            return Err(Error::InvalidParams(format!(
                "attack round l = {} must satisfy 1 ≤ l ≤ m = {}",
                self.l, self.m
            )));
        }
        Ok(())
    }

    pub fn amplitudes(&self) -> QubitAmplitudes {
        QubitAmplitudes { c: self.c, s: self.s }
    }

    pub fn c2(&self) -> f64 {
        self.c * self.c
    }

    /// Number of bits in the parity strings that start at round `k`
    /// (rounds `k` through `m` inclusive).
    pub fn string_length(&self, k: usize) -> Result<usize> {
        if k == 0 || k > self.m + 1 {
            return Err(Error::InvalidArgument(format!("start round {k} outside 1..={}", self.m + 1)));
        }
        Ok(self.m + 1 - k)
    }
}

/// Amplitudes of `Φ(0), Φ(1)` in the two-dimensional space they span.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub c_eff: f64,
    pub s_eff: f64,
    /// `s_eff²`.
    pub t: f64,
}

impl EffectiveParams {
    /// From the block overlap `⟨Φ(0)|Φ(1)⟩ = c_eff² − s_eff²`.
    pub fn from_overlap(overlap: f64) -> Self {
        let overlap = overlap.clamp(-1.0, 1.0);
        let t = 0.5 * (1.0 - overlap);
        EffectiveParams { c_eff: (0.5 * (1.0 + overlap)).sqrt(), s_eff: t.sqrt(), t }
    }

    pub fn from_t(t: f64) -> Self {
        Self::from_overlap(1.0 - 2.0 * t)
    }

    pub fn overlap(&self) -> f64 {
        self.c_eff * self.c_eff - self.s_eff * self.s_eff
    }

    pub fn amplitudes(&self) -> QubitAmplitudes {
        QubitAmplitudes { c: self.c_eff, s: self.s_eff }
    }
}

/// Compresses `n`-qubit blocks onto the span of `Φ(0), Φ(1)`:
/// `c_eff² − s_eff² = (c² − s²)ⁿ`.
pub fn effective_params(p: &ProtocolParams) -> EffectiveParams {
    effective_for(p.amplitudes(), p.n)
}

pub fn effective_for(amps: QubitAmplitudes, n: usize) -> EffectiveParams {
    EffectiveParams::from_overlap(amps.overlap().powi(n as i32))
}

/// How a committed bit's `n`-qubit block is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    /// Two amplitudes per block in the span of `Φ(0), Φ(1)`.
    #[default]
    Compressed,
    /// The full `2ⁿ`-dimensional tensor power.
    Full,
}

impl Representation {
    pub fn block_dim(self, n: usize) -> usize {
        match self {
            Representation::Compressed => 2,
            Representation::Full => 1 << n,
        }
    }
}

/// `ψ(0) = c|0⟩ + s|1⟩`, `ψ(1) = c|0⟩ − s|1⟩`.
pub fn psi(b: u8, amps: QubitAmplitudes) -> StateVector {
    let sign = if b & 1 == 0 { 1.0 } else { -1.0 };
    StateVector::from_real(&[amps.c, sign * amps.s], vec![2]).expect("unit amplitudes")
}

/// `Φ(b) = ψ(b)^{⊗n}`, or its two-amplitude image when `compressed`.
pub fn phi(b: u8, p: &ProtocolParams, compressed: bool) -> StateVector {
    let repr = if compressed { Representation::Compressed } else { Representation::Full };
    block_state(b, p.amplitudes(), p.n, repr)
}

pub fn block_state(b: u8, amps: QubitAmplitudes, n: usize, repr: Representation) -> StateVector {
    match repr {
        Representation::Compressed => psi(b, effective_for(amps, n).amplitudes()),
        Representation::Full => {
            let one = psi(b, amps);
            (1..n).fold(one.clone(), |acc, _| acc.tensor(&one))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn params(c2: f64, n: usize) -> ProtocolParams {
        ProtocolParams::from_c2(c2, n, 3, 1).unwrap()
    }

    #[test]
    fn validation() {
        assert!(ProtocolParams::from_c2(0.9, 1, 2, 1).is_ok());
        assert!(ProtocolParams::from_c2(1.0, 1, 2, 1).is_err());
        assert!(ProtocolParams::from_c2(0.9, 0, 2, 1).is_err());
        assert!(ProtocolParams::from_c2(0.9, 1, 2, 0).is_err());
        assert!(ProtocolParams::from_c2(0.9, 1, 2, 3).is_err());
        assert!(ProtocolParams::new(0.8, 0.8, 1, 2, 1).is_err());
        assert!(QubitAmplitudes::new(1.0, 0.0).is_ok());
    }

    #[test]
    fn psi_examples() {
        let z = psi(0, QubitAmplitudes::new(1.0, 0.0).unwrap());
        assert!((z.amplitudes()[0] - c(1.0)).norm() < 1e-15 && z.amplitudes()[1].norm() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let even = QubitAmplitudes::new(h, h).unwrap();
        assert!(psi(0, even).inner(&psi(1, even)).unwrap().norm() < 1e-15);
        for c2 in [0.55, 0.75, 0.9, 0.99] {
            let a = QubitAmplitudes::from_c2(c2).unwrap();
            let ip = psi(0, a).inner(&psi(1, a)).unwrap();
            assert!((ip.re - (2.0 * c2 - 1.0)).abs() < 1e-14);
        }
    }

    #[test]
    fn tensor_of_opposite_psis() {
        let a = QubitAmplitudes::from_c2(0.9).unwrap();
        let v = psi(0, a).tensor(&psi(1, a));
        let expect = [0.9, -0.3, 0.3, -0.1];
        for (x, e) in v.amplitudes().iter().zip(expect) {
            assert!((x.re - e).abs() < 1e-14 && x.im == 0.0);
        }
    }

    #[test]
    fn phi_overlap_in_both_representations() {
        for n in 1..=4 {
            let p = params(0.9, n);
            for compressed in [false, true] {
                let ip = phi(0, &p, compressed).inner(&phi(1, &p, compressed)).unwrap().re;
                assert!((ip - 0.8f64.powi(n as i32)).abs() < 1e-13);
            }
        }
        let p = params(0.9, 2);
        assert!((phi(0, &p, true).inner(&phi(1, &p, true)).unwrap().re - 0.64).abs() < 1e-14);
        let p1 = params(0.9, 1);
        assert_eq!(phi(1, &p1, false), psi(1, p1.amplitudes()));
        assert!((phi(1, &p1, true).amplitudes() - psi(1, p1.amplitudes()).amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn effective_parameter_examples() {
        let e = effective_params(&params(0.9, 1));
        assert!((e.c_eff - 0.9f64.sqrt()).abs() < 1e-14);
        let e = effective_params(&params(0.9, 2));
        assert!((e.t - 0.18).abs() < 1e-14);
        assert!((e.c_eff * e.c_eff + e.s_eff * e.s_eff - 1.0).abs() < 1e-12);
        let e = effective_params(&params(0.9, 200));
        assert!((e.t - 0.5).abs() < 1e-15);
    }

    #[test]
    fn string_length_convention() {
        let p = ProtocolParams::from_c2(0.9, 1, 5, 2).unwrap();
        assert_eq!(p.string_length(1).unwrap(), 5);
        assert_eq!(p.string_length(5).unwrap(), 1);
        assert_eq!(p.string_length(6).unwrap(), 0);
        assert!(p.string_length(0).is_err());
    }
}
