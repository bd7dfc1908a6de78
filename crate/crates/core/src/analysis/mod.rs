//! Closed forms of the attack's success probability and its large-`m` limit.

mod asymptotic;
mod bound;
mod parity;

pub use asymptotic::{
    bias_from_k, curve, fidelity_gaussian, gaussian_alpha, golden_section_max, max_bias, pe_complement_gaussian,
    t_from_alpha, uniform_grid, BiasCurvePoint, Optimum, K_MARGIN, K_TOLERANCE, SCAN_POINTS,
};
pub use bound::{bias_bound_terms, bias_lower_bound, bound_sweep, optimal_l, BiasBound, OptimalL, Setting};
pub use parity::{binomial_overlap_form, fidelity_parity, pe_parity, ParityProblem, MAX_STRING_LENGTH};
