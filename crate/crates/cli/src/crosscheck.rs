//! Closed forms against dense-matrix oracles, and the compressed protocol
//! simulation against the full one.

use serde::{Deserialize, Serialize};

use qcoin_core::analysis::{fidelity_parity, pe_parity};
use qcoin_core::protocol::{
    compare_attack_traces, compare_honest_traces, effective_for, parity_mixture_of_length, ProtocolParams,
    QubitAmplitudes, Representation,
};
use qcoin_core::quantum::{fidelity, helstrom_pe};

use crate::error::{CliError, CliResult};
use crate::format::sig;

pub const TOLERANCE: f64 = 1e-8;

/// Most qubits any state in the sweep may hold.
pub const MAX_QUBITS: usize = 12;

/// Parity mixtures are also built qubit by qubit up to this many qubits;
/// beyond it only the compressed blocks are used.
pub const FULL_ORACLE_QUBITS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    /// String lengths `1..=q_max`.
    pub q_max: usize,
    pub c2: Vec<f64>,
    pub n: Vec<usize>,
    /// Seeded branches replayed per protocol configuration.
    pub trace_seeds: u64,
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep { q_max: 6, c2: vec![0.6, 0.75, 0.9], n: vec![1, 2], trace_seeds: 4 }
    }
}

impl Sweep {
    pub fn validate(&self) -> CliResult<()> {
        if self.q_max == 0 || self.c2.is_empty() || self.n.is_empty() {
            return Err(CliError::Usage("empty sweep".into()));
        }
        if let Some(c2) = self.c2.iter().find(|&&c2| !(c2 > 0.0 && c2 < 1.0)) {
            return Err(CliError::Usage(format!("c² = {c2} must lie strictly inside (0, 1)")));
        }
        if self.n.contains(&0) {
            return Err(CliError::Usage("n must be at least 1".into()));
        }
        let widest = self.q_max * self.n.iter().max().expect("checked non-empty");
        if widest > MAX_QUBITS {
            return Err(CliError::Usage(format!("q_max · n = {widest} exceeds {MAX_QUBITS} qubits")));
        }
        Ok(())
    }

    /// Protocol sizes `(m, n)` whose two parties together hold at most
    /// [`MAX_QUBITS`] qubits.
    pub fn protocol_sizes(&self) -> Vec<(usize, usize)> {
        self.n.iter().flat_map(|&n| (1..=MAX_QUBITS / (2 * n)).map(move |m| (m, n))).collect()
    }
}

/// The closed forms under test, as `f(q, c_eff, s_eff)`.
#[derive(Debug, Clone, Copy)]
pub struct ClosedForms {
    pub pe: fn(usize, f64, f64) -> f64,
    pub fidelity: fn(usize, f64, f64) -> f64,
}

impl ClosedForms {
    pub fn exact() -> Self {
        ClosedForms { pe: pe_parity, fidelity: fidelity_parity }
    }

    /// Both forms evaluated one bit too long: a negative control.
    pub fn off_by_one() -> Self {
        ClosedForms { pe: |q, c, s| pe_parity(q + 1, c, s), fidelity: |q, c, s| fidelity_parity(q + 1, c, s) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Pe,
    Fidelity,
    /// Choice probabilities along replayed protocol runs.
    Trace,
}

/// One comparison that exceeded the tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub check: CheckKind,
    pub c2: f64,
    pub n: usize,
    pub q: Option<usize>,
    /// How the oracle's parity mixtures were built.
    pub representation: Option<Representation>,
    pub m: Option<usize>,
    pub l: Option<usize>,
    /// `None` for honest runs in trace checks.
    pub target: Option<u8>,
    #[serde(serialize_with = "sig::option::serialize")]
    pub closed_form: Option<f64>,
    #[serde(serialize_with = "sig::option::serialize")]
    pub oracle: Option<f64>,
    pub diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosscheckReport {
    pub sweep: Sweep,
    pub tolerance: f64,
    pub checks: usize,
    pub max_diff: f64,
    pub failures: Vec<Discrepancy>,
    pub pass: bool,
}

struct Collector {
    checks: usize,
    max_diff: f64,
    failures: Vec<Discrepancy>,
}

impl Collector {
    fn record(&mut self, d: Discrepancy) {
        self.checks += 1;
        self.max_diff = self.max_diff.max(d.diff);
        if !(d.diff <= TOLERANCE) {
            self.failures.push(d);
        }
    }
}

pub fn crosscheck(sweep: &Sweep) -> CliResult<CrosscheckReport> {
    crosscheck_with(sweep, &ClosedForms::exact())
}

pub fn crosscheck_with(sweep: &Sweep, forms: &ClosedForms) -> CliResult<CrosscheckReport> {
    sweep.validate()?;
    let mut out = Collector { checks: 0, max_diff: 0.0, failures: Vec::new() };
    for &c2 in &sweep.c2 {
        let amps = QubitAmplitudes::from_c2(c2)?;
        for &n in &sweep.n {
            let eff = effective_for(amps, n);
            for q in 1..=sweep.q_max {
                let closed_pe = (forms.pe)(q, eff.c_eff, eff.s_eff);
                let closed_f = (forms.fidelity)(q, eff.c_eff, eff.s_eff);
                let mut reprs = vec![Representation::Compressed];
                if q * n <= FULL_ORACLE_QUBITS {
                    reprs.push(Representation::Full);
                }
                for repr in reprs {
                    let rho0 = parity_mixture_of_length(q, 0, amps, n, repr)?;
                    let rho1 = parity_mixture_of_length(q, 1, amps, n, repr)?;
                    let (pe, _) = helstrom_pe(&rho0, &rho1)?;
                    let f = fidelity(&rho0, &rho1)?;
                    for (check, closed, oracle) in [(CheckKind::Pe, closed_pe, pe), (CheckKind::Fidelity, closed_f, f)]
                    {
                        out.record(Discrepancy {
                            check,
                            c2,
                            n,
                            q: Some(q),
                            representation: Some(repr),
                            m: None,
                            l: None,
                            target: None,
                            closed_form: Some(closed),
                            oracle: Some(oracle),
                            diff: (closed - oracle).abs(),
                        });
                    }
                }
            }
        }
        for (m, n) in sweep.protocol_sizes() {
            let trace = |l: usize, target: Option<u8>, diff: f64| Discrepancy {
                check: CheckKind::Trace,
                c2,
                n,
                q: None,
                representation: None,
                m: Some(m),
                l: Some(l),
                target,
                closed_form: None,
                oracle: None,
                diff,
            };
            let seeds = 0..sweep.trace_seeds;
            let honest = compare_honest_traces(&ProtocolParams::from_c2(c2, n, m, 1)?, seeds.clone())?;
            out.record(trace(1, None, mismatch_diff(honest.max_diff, honest.result_mismatches)));
            for l in 1..=m {
                let p = ProtocolParams::from_c2(c2, n, m, l)?;
                for target in 0..2 {
                    let cmp = compare_attack_traces(&p, target, seeds.clone())?;
                    out.record(trace(l, Some(target), mismatch_diff(cmp.max_diff, cmp.result_mismatches)));
                }
            }
        }
    }
    let pass = out.failures.is_empty();
    Ok(CrosscheckReport {
        sweep: sweep.clone(),
        tolerance: TOLERANCE,
        checks: out.checks,
        max_diff: out.max_diff,
        failures: out.failures,
        pass,
    })
}

/// Replays that end in different results count as a total mismatch.
fn mismatch_diff(max_diff: f64, mismatches: usize) -> f64 {
    if mismatches > 0 {
        1.0
    } else {
        max_diff
    }
}
