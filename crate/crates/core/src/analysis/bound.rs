//! The attack's success bound at finite `m` and the best round to attack.

use serde::{Deserialize, Serialize};

use super::asymptotic::max_bias;
use super::parity::{fidelity_parity, pe_parity};
use crate::error::{Error, Result};
use crate::protocol::{effective_params, EffectiveParams, ProtocolParams};

/// The two factors of the bound and their combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasBound {
    /// Error guessing the parity of rounds `l+1..=m`.
    pub pe: f64,
    /// Fidelity of the parity mixtures over rounds `l..=m`.
    pub fidelity: f64,
    /// `½ (1 − pe)(1 + fidelity²)`, a lower bound on `P(X = target)`.
    pub p0: f64,
}

/// Lower bound on `P(X = target)` for an attack at round `l`.
///
/// The parity guess covers rounds `l+1..=m` (`m − l` bits) and the rotation
/// acts on rounds `l..=m` (`m − l + 1` bits).
pub fn bias_lower_bound(p: &ProtocolParams) -> f64 {
    bias_bound_terms(p.m, p.l, &effective_params(p)).p0
}

pub fn bias_bound_terms(m: usize, l: usize, eff: &EffectiveParams) -> BiasBound {
    let pe = pe_parity(m - l, eff.c_eff, eff.s_eff);
    let fidelity = fidelity_parity(m - l + 1, eff.c_eff, eff.s_eff);
    BiasBound { pe, fidelity, p0: 0.5 * (1.0 - pe) * (1.0 + fidelity * fidelity) }
}

/// Block overlap and qubits per block from which `optimal_l` works.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Setting {
    /// `c² − s² = cos(π/9)` and `n = log₂ m`.
    Standard,
    /// Explicit single-qubit overlap `c² − s²` and (possibly fractional) `n`.
    Custom { overlap: f64, n: f64 },
}

impl Setting {
    pub fn effective(&self, m: usize) -> EffectiveParams {
        let (overlap, n) = match *self {
            Setting::Standard => ((std::f64::consts::PI / 9.0).cos(), (m as f64).log2()),
            Setting::Custom { overlap, n } => (overlap, n),
        };
        EffectiveParams::from_overlap(overlap.powf(n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalL {
    pub m: usize,
    /// Rounds still unrevealed when the attack should happen, as a real
    /// number: the `r` with `(2c′s′)^r = K_star`.
    pub unrevealed: f64,
    /// `m − round(unrevealed)`, kept within `1..=m`.
    pub l: usize,
    /// `K` implied by `unrevealed`.
    pub k_implied: f64,
    /// The finite-`m` bound at `l`.
    pub p0: f64,
    pub bias: f64,
}

/// The round at which the tradeoff curve says Bob* should attack.
pub fn optimal_l(m: usize, setting: Setting) -> Result<OptimalL> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("m = {m}: need at least two rounds")));
    }
    let eff = setting.effective(m);
    let k_one = 2.0 * eff.c_eff * eff.s_eff;
    if !(k_one > 0.0 && k_one < 1.0) {
        return Err(Error::InvalidParams(format!(
            "single-round distinguishability {k_one} leaves nothing to optimize"
        )));
    }
    let k_star = max_bias().k_star;
    let unrevealed = k_star.ln() / k_one.ln();
    let l = (m as f64 - unrevealed.round()).clamp(1.0, m as f64) as usize;
    let p0 = bias_bound_terms(m, l, &eff).p0;
    Ok(OptimalL { m, unrevealed, l, k_implied: k_one.powf(unrevealed), p0, bias: p0 - 0.5 })
}

/// The bound at every attack round `1..=m`.
pub fn bound_sweep(m: usize, eff: &EffectiveParams) -> Vec<(usize, BiasBound)> {
    (1..=m).map(|l| (l, bias_bound_terms(m, l, eff))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{EffectiveParams, QubitAmplitudes};

    #[test]
    fn bound_at_two_rounds() {
        // one-bit guess with error (1 − 0.6)/2, two-bit fidelity 0.8
        let p = ProtocolParams::from_c2(0.9, 1, 2, 1).unwrap();
        assert!((bias_lower_bound(&p) - 0.5 * 0.8 * 1.64).abs() < 1e-14);
    }

    #[test]
    fn bound_at_the_last_round() {
        // nothing left to guess; only Alice's last block can be steered
        for c2 in [0.6, 0.9] {
            let p = ProtocolParams::from_c2(c2, 2, 3, 3).unwrap();
            let overlap = (2.0 * c2 - 1.0f64).powi(2);
            assert!((bias_lower_bound(&p) - 0.5 * (1.0 + overlap * overlap)).abs() < 1e-14);
        }
    }

    #[test]
    fn orthogonal_blocks() {
        // c = s: the parity is known exactly but cannot be changed
        let eff = EffectiveParams::from_overlap(0.0);
        let b = bias_bound_terms(2, 1, &eff);
        assert!(b.pe.abs() < 1e-15 && b.fidelity < 1e-12);
        assert!((b.p0 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bound_tends_to_one_half_at_both_extremes() {
        // t → ½: orthogonal blocks, parity known but fidelity zero
        let b = bias_bound_terms(400, 1, &EffectiveParams::from_t(0.5 - 1e-9));
        assert!(b.pe < 1e-9 && b.fidelity < 1e-6 && (b.p0 - 0.5).abs() < 1e-6);
        // t → 0: identical blocks, nothing learned but nothing to hide
        let b = bias_bound_terms(400, 1, &EffectiveParams::from_t(1e-12));
        assert!((b.pe - 0.5).abs() < 1e-6 && (b.fidelity - 1.0).abs() < 1e-6 && (b.p0 - 0.5).abs() < 1e-6);
    }

    #[test]
    fn tradeoff_directions() {
        // later attacks: easier parity guess, harder flip
        let eff = Setting::Standard.effective(40);
        let sweep = bound_sweep(40, &eff);
        for w in sweep.windows(2) {
            assert!(w[1].1.pe <= w[0].1.pe + 1e-15);
            assert!(w[1].1.fidelity <= w[0].1.fidelity + 1e-12);
        }
    }

    #[test]
    fn optimal_l_for_the_standard_setting() {
        let cos = (std::f64::consts::PI / 9.0).cos();
        assert!((cos - 0.939_692_6).abs() < 1e-7);
        let k_star = max_bias().k_star;
        for m in [20, 40, 64, 80] {
            let opt = optimal_l(m, Setting::Standard).unwrap();
            assert!((opt.k_implied - k_star).abs() < 1e-12);
            let eff = Setting::Standard.effective(m);
            let best = bound_sweep(m, &eff)[..m - 1].iter().max_by(|a, b| a.1.p0.total_cmp(&b.1.p0)).unwrap().0;
            assert!(opt.l.abs_diff(best) <= 1, "m = {m}: {} vs {best}", opt.l);
        }
        assert!(optimal_l(1, Setting::Standard).is_err());
    }

    #[test]
    fn custom_setting_at_forty_rounds() {
        let setting = Setting::Custom { overlap: 0.8, n: 1.0 };
        let opt = optimal_l(40, setting).unwrap();
        let eff = EffectiveParams::from_overlap(0.8);
        let direct = crate::protocol::effective_for(QubitAmplitudes::from_c2(0.9).unwrap(), 1);
        assert!((eff.t - direct.t).abs() < 1e-15);
        assert!((opt.p0 - bias_bound_terms(40, opt.l, &eff).p0).abs() < 1e-15);
    }
}
