//! Large-string approximations and the bias curve they lead to.

use libm::erf;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Endpoint margin for searches over `K ∈ (0, 1)`.
pub const K_MARGIN: f64 = 1e-9;
/// Points in the coarse scan preceding the golden-section search.
pub const SCAN_POINTS: usize = 999;
/// Absolute tolerance in `K` of the golden-section search.
pub const K_TOLERANCE: f64 = 1e-7;

/// `α = √(q (1−2t)² / (4t(1−t)))`: how many standard deviations of the
/// `Binomial(q, t)` distribution separate its mean from `q/2`.
pub fn gaussian_alpha(q: usize, t: f64) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidArgument(format!("t = {t} must lie strictly inside (0, 1)")));
    }
    let d = 1.0 - 2.0 * t;
    Ok((q as f64 * d * d / (4.0 * t * (1.0 - t))).sqrt())
}

/// Inverse of [`gaussian_alpha`] on the branch `t ≤ ½`.
pub fn t_from_alpha(q: usize, alpha: f64) -> f64 {
    0.5 - alpha / (2.0 * (q as f64 + alpha * alpha).sqrt())
}

/// `Erf(α/√2)`, the normal approximation of the parity-mixture fidelity.
pub fn fidelity_gaussian(alpha: f64) -> f64 {
    erf(alpha / std::f64::consts::SQRT_2)
}

/// `(1 + e^{−α²/2})/2`, a lower bound on the probability of guessing the
/// parity right.
pub fn pe_complement_gaussian(alpha: f64) -> f64 {
    0.5 * (1.0 + (-0.5 * alpha * alpha).exp())
}

/// `P(X = 0) = (1+K)(1 + Erf(√(−ln K))²)/4` on the information–fidelity
/// tradeoff curve.
pub fn bias_from_k(k: f64) -> Result<f64> {
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::InvalidArgument(format!("K = {k} must lie strictly inside (0, 1)")));
    }
    Ok(p0_unchecked(k))
}

fn p0_unchecked(k: f64) -> f64 {
    let f = erf((-k.ln()).sqrt());
    0.25 * (1.0 + k) * (1.0 + f * f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasCurvePoint {
    #[serde(rename = "K")]
    pub k: f64,
    pub p0: f64,
    pub bias: f64,
}

/// `K_i = i/(n+1)` for `i = 1..=n`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

/// The curve sampled at a strictly increasing grid inside `(0, 1)`.
pub fn curve(grid: &[f64]) -> Result<Vec<BiasCurvePoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty K grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("K grid must be strictly increasing".into()));
    }
    grid.iter()
        .map(|&k| {
            let p0 = bias_from_k(k)?;
            Ok(BiasCurvePoint { k, p0, bias: p0 - 0.5 })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    #[serde(rename = "K_star")]
    pub k_star: f64,
    pub bias_star: f64,
    /// `√(−2 ln K_star)`.
    pub alpha_star: f64,
}

impl Optimum {
    /// Whether the bias at `K_star` is at least that at `K_star ± step`.
    pub fn is_local_max(&self, step: f64) -> bool {
        [self.k_star - step, self.k_star + step]
            .iter()
            .all(|&k| !(k > 0.0 && k < 1.0) || p0_unchecked(k) - 0.5 <= self.bias_star)
    }
}

/// Maximizer of a unimodal function on `[a, b]` to within `tol`.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// The maximum of the tradeoff curve: a coarse scan to bracket it, then
/// golden-section search.
pub fn max_bias() -> Optimum {
    let grid = uniform_grid(SCAN_POINTS);
    let best = (0..grid.len())
        .max_by(|&i, &j| p0_unchecked(grid[i]).total_cmp(&p0_unchecked(grid[j])))
        .expect("grid is not empty");
    let lo = if best == 0 { K_MARGIN } else { grid[best - 1] };
    let hi = if best + 1 == grid.len() { 1.0 - K_MARGIN } else { grid[best + 1] };
    let (k_star, p0) = golden_section_max(p0_unchecked, lo, hi, K_TOLERANCE);
    Optimum { k_star, bias_star: p0 - 0.5, alpha_star: (-2.0 * k_star.ln()).sqrt() }
}
