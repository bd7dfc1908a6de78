//! Closed forms for telling apart the two parity mixtures of `q`-bit strings
//! whose bits are encoded in states with amplitudes `(c, s)`.

use libm::lgamma;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::EffectiveParams;

/// Largest string length the sums accept.
pub const MAX_STRING_LENGTH: usize = 1_000_000;

/// One instance of the parity problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityProblem {
    pub q: usize,
    pub c_eff: f64,
    pub s_eff: f64,
    pub t: f64,
}

impl ParityProblem {
    pub fn new(q: usize, eff: EffectiveParams) -> Result<Self> {
        if q == 0 || q > MAX_STRING_LENGTH {
            return Err(Error::InvalidArgument(format!("string length {q} outside 1..={MAX_STRING_LENGTH}")));
        }
        if (eff.c_eff * eff.c_eff + eff.s_eff * eff.s_eff - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams("effective amplitudes are not a unit pair".into()));
        }
        Ok(ParityProblem { q, c_eff: eff.c_eff, s_eff: eff.s_eff, t: eff.t })
    }

    pub fn pe(&self) -> f64 {
        pe_parity(self.q, self.c_eff, self.s_eff)
    }

    pub fn fidelity(&self) -> f64 {
        fidelity_parity(self.q, self.c_eff, self.s_eff)
    }
}

/// Minimum error probability for the parity of `q` bits: `(1 − (2cs)^q)/2`.
/// `q = 0` gives `0`: an empty string has known parity.
pub fn pe_parity(q: usize, c_eff: f64, s_eff: f64) -> f64 {
    let k = (2.0 * c_eff * s_eff).abs().min(1.0);
    0.5 * (1.0 - k.powf(q as f64))
}

/// Sum with Neumaier's compensation, after sorting by decreasing size.
fn sum_largest_first(mut terms: Vec<f64>) -> f64 {
    terms.sort_unstable_by(|a, b| b.abs().total_cmp(&a.abs()));
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in terms {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + comp
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    lgamma(n as f64 + 1.0) - lgamma(k as f64 + 1.0) - lgamma((n - k) as f64 + 1.0)
}

/// `k ln x`, taking `0 · ln 0 = 0`.
fn xlogy(k: f64, x: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * x.ln()
    }
}

/// `ln P(K = k)` for `K ~ Binomial(q, t)`.
fn ln_binomial_pmf(q: usize, k: usize, t: f64) -> f64 {
    ln_binomial(q as u64, k as u64) + xlogy(k as f64, t) + xlogy((q - k) as f64, 1.0 - t)
}

/// `P(K > k)` for `K ~ Binomial(q, t)`.
fn upper_tail(q: usize, k: usize, t: f64) -> f64 {
    sum_largest_first((k + 1..=q).map(|j| ln_binomial_pmf(q, j, t).exp()).collect())
}

/// Fidelity of the two parity mixtures:
/// `Σ_{k ≤ ⌊q/2⌋} C(q,k) |c^{2(q−k)} s^{2k} − c^{2k} s^{2(q−k)}|`.
///
/// With `t = s²` the `k`-th term is the difference of the `Binomial(q, t)`
/// and `Binomial(q, 1−t)` probabilities of `k`, so the sum equals
/// `1 − 2 P(K > q/2) − P(K = q/2)` for `K ~ Binomial(q, min(t, 1−t))`. That
/// form is evaluated, in log space, so `q` up to [`MAX_STRING_LENGTH`] keeps
/// full relative accuracy in the small tail.
pub fn fidelity_parity(q: usize, c_eff: f64, s_eff: f64) -> f64 {
    let t = (s_eff * s_eff) / (c_eff * c_eff + s_eff * s_eff);
    let t = t.min(1.0 - t);
    if t == 0.5 || q == 0 {
        return 0.0;
    }
    let middle = if q % 2 == 0 { ln_binomial_pmf(q, q / 2, t).exp() } else { 0.0 };
    (1.0 - 2.0 * upper_tail(q, q / 2, t) - middle).clamp(0.0, 1.0)
}

/// `2 Σ_{k ≤ ⌊q/2⌋} C(q,k) t^k (1−t)^{q−k} − 1`: twice a binomial CDF, less one.
///
/// Matches [`fidelity_parity`] at `t = s_eff² ≤ ½` for odd `q`. For even `q`
/// the middle term `k = q/2` vanishes from the fidelity but is counted twice
/// here, once too often: the two differ by `C(q,q/2) (t(1−t))^{q/2}`.
pub fn binomial_overlap_form(q: usize, t: f64) -> Result<f64> {
    if q == 0 || q > MAX_STRING_LENGTH {
        return Err(Error::InvalidArgument(format!("string length {q} outside 1..={MAX_STRING_LENGTH}")));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("t = {t} outside [0, 1]")));
    }
    Ok(1.0 - 2.0 * upper_tail(q, q / 2, t))
}
