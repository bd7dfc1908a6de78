//! Many independent protocol runs, spread over worker threads.
//!
//! Run `i` draws from a generator seeded with `seed ^ i`, so every run can be
//! reproduced alone. Results are aggregated as counts, which makes the report
//! independent of the order in which runs finish.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use qcoin_core::analysis::bias_lower_bound;
use qcoin_core::protocol::{
    run_honest_with, seeded_source, Attacker, Outcome, ProtocolParams, Representation, RunKind, Transcript,
};

use crate::error::{CliError, CliResult};
use crate::format::sig;

/// Runs simulated and written between two flushes of the transcript sink.
const CHUNK: u64 = 4096;

/// Standard errors below the bound that still count as consistent with it.
pub const SIGMA_MULTIPLE: f64 = 4.0;

/// Seed of run `index` derived from the experiment seed.
pub fn run_seed(seed: u64, index: u64) -> u64 {
    seed ^ index
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub zero: u64,
    pub one: u64,
    pub abort: u64,
}

impl Counts {
    fn of(x: Outcome) -> Self {
        match x {
            Outcome::Bit(0) => Counts { zero: 1, ..Default::default() },
            Outcome::Bit(_) => Counts { one: 1, ..Default::default() },
            Outcome::Abort => Counts { abort: 1, ..Default::default() },
        }
    }

    fn merge(self, o: Counts) -> Counts {
        Counts { zero: self.zero + o.zero, one: self.one + o.one, abort: self.abort + o.abort }
    }

    pub fn total(&self) -> u64 {
        self.zero + self.one + self.abort
    }

    pub fn of_bit(&self, b: u8) -> u64 {
        if b == 0 {
            self.zero
        } else {
            self.one
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Experiment {
    pub params: ProtocolParams,
    /// `None` for honest runs.
    pub target: Option<u8>,
    pub runs: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub kind: RunKind,
    pub params: ProtocolParams,
    pub target: Option<u8>,
    pub runs: u64,
    pub seed: u64,
    pub counts: Counts,
    /// Empirical `P(X = 0)`.
    #[serde(serialize_with = "sig::serialize")]
    pub p0_hat: f64,
    /// Empirical probability of the checked outcome: the target for attacks,
    /// `0` for honest runs.
    #[serde(serialize_with = "sig::serialize")]
    pub p_hat: f64,
    #[serde(serialize_with = "sig::serialize")]
    pub std_error: f64,
    /// Closed-form value `p_hat` is checked against.
    #[serde(serialize_with = "sig::serialize")]
    pub bound: f64,
    pub pass: bool,
}

impl AggregateReport {
    /// Honest runs: no aborts and `|p̂ − ½| ≤ 4√(¼/N)`. Attacks:
    /// `p̂ ≥ bound − 4σ` with `σ` the binomial standard error of `p̂`.
    fn from_counts(e: &Experiment, counts: Counts) -> Self {
        let n = counts.total() as f64;
        let p0_hat = counts.zero as f64 / n;
        let (kind, checked, bound) = match e.target {
            None => (RunKind::Honest, 0, 0.5),
            Some(t) => (RunKind::Attack, t, bias_lower_bound(&e.params)),
        };
        let p_hat = counts.of_bit(checked) as f64 / n;
        let (std_error, pass) = match e.target {
            None => {
                let se = (0.25 / n).sqrt();
                (se, counts.abort == 0 && (p_hat - 0.5).abs() <= SIGMA_MULTIPLE * se)
            }
            Some(_) => {
                let se = (p_hat * (1.0 - p_hat) / n).sqrt();
                (se, p_hat >= bound - SIGMA_MULTIPLE * se)
            }
        };
        AggregateReport {
            kind,
            params: e.params,
            target: e.target,
            runs: e.runs,
            seed: e.seed,
            counts,
            p0_hat,
            p_hat,
            std_error,
            bound,
            pass,
        }
    }

    pub fn csv_header() -> &'static str {
        "kind,c2,n,m,l,target,runs,seed,zero,one,abort,p0_hat,p_hat,std_error,bound,pass"
    }

    pub fn csv_row(&self) -> String {
        use crate::format::fmt_sig;
        let p = &self.params;
        let kind = match self.kind {
            RunKind::Honest => "honest",
            RunKind::Attack => "attack",
        };
        let target = self.target.map(|t| t.to_string()).unwrap_or_default();
        format!(
            "{kind},{},{},{},{},{target},{},{},{},{},{},{},{},{},{},{}",
            fmt_sig(p.c2()),
            p.n,
            p.m,
            p.l,
            self.runs,
            self.seed,
            self.counts.zero,
            self.counts.one,
            self.counts.abort,
            fmt_sig(self.p0_hat),
            fmt_sig(self.p_hat),
            fmt_sig(self.std_error),
            fmt_sig(self.bound),
            self.pass
        )
    }
}

enum Runner {
    Honest(ProtocolParams),
    Attack(Box<Attacker>, u8),
}

impl Runner {
    fn run(&self, seed: u64) -> qcoin_core::Result<Transcript> {
        match self {
            Runner::Honest(p) => run_honest_with(p, Representation::Compressed, &mut seeded_source(seed), Some(seed)),
            Runner::Attack(a, t) => a.run(*t, &mut seeded_source(seed), Some(seed)),
        }
    }
}

/// Runs the experiment, writing one JSON transcript per line to `sink` in
/// run order when given.
pub fn simulate(e: &Experiment, mut sink: Option<&mut dyn Write>) -> CliResult<AggregateReport> {
    if e.runs == 0 {
        return Err(CliError::Usage("need at least one run".into()));
    }
    e.params.validate()?;
    let runner = match e.target {
        None => Runner::Honest(e.params),
        Some(t) if t > 1 => return Err(CliError::Usage(format!("target must be 0 or 1, got {t}"))),
        Some(t) => Runner::Attack(Box::new(Attacker::new(&e.params, Representation::Compressed)?), t),
    };
    let mut counts = Counts::default();
    let mut start = 0;
    while start < e.runs {
        let end = (start + CHUNK).min(e.runs);
        let seeds = (start..end).into_par_iter().map(|i| run_seed(e.seed, i));
        match sink.as_deref_mut() {
            Some(w) => {
                let transcripts: Vec<Transcript> = seeds.map(|s| runner.run(s)).collect::<qcoin_core::Result<_>>()?;
                for t in &transcripts {
                    counts = counts.merge(Counts::of(t.result));
                    writeln!(w, "{}", t.to_json_line()?).map_err(|err| CliError::io("transcript output", err))?;
                }
            }
            None => {
                let chunk = seeds
                    .map(|s| runner.run(s).map(|t| Counts::of(t.result)))
                    .try_reduce(Counts::default, |a, b| Ok(a.merge(b)))?;
                counts = counts.merge(chunk);
            }
        }
        start = end;
    }
    Ok(AggregateReport::from_counts(e, counts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn experiment(target: Option<u8>, runs: u64) -> Experiment {
        Experiment { params: ProtocolParams::from_c2(0.9, 1, 2, 1).unwrap(), target, runs, seed: 42 }
    }

    #[test]
    fn seeds_split_by_xor() {
        assert_eq!(run_seed(0, 5), 5);
        assert_eq!(run_seed(0b1100, 0b1010), 0b0110);
    }

    #[test]
    fn counts_add_up_and_transcripts_match() {
        let e = experiment(Some(0), 300);
        let mut buf = Vec::new();
        let report = simulate(&e, Some(&mut buf)).unwrap();
        assert_eq!(report.counts.total(), 300);
        let lines: Vec<&str> = std::str::from_utf8(&buf).unwrap().lines().collect();
        assert_eq!(lines.len(), 300);
        let mut counts = Counts::default();
        for (i, line) in lines.iter().enumerate() {
            let t = Transcript::from_json_line(line).unwrap();
            assert_eq!(t.seed, Some(run_seed(42, i as u64)));
            counts = counts.merge(Counts::of(t.result));
        }
        assert_eq!(counts, report.counts);
        assert_eq!(simulate(&e, None).unwrap(), report);
    }

    #[test]
    fn result_does_not_depend_on_thread_count() {
        let e = experiment(None, 2000);
        let one =
            rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| simulate(&e, None).unwrap());
        let many =
            rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| simulate(&e, None).unwrap());
        assert_eq!(one, many);
        assert_eq!(one.counts.abort, 0);
    }

    #[test]
    fn invalid_experiments_are_rejected() {
        assert!(simulate(&experiment(None, 0), None).is_err());
        assert!(simulate(&experiment(Some(2), 10), None).is_err());
    }

    #[test]
    fn csv_row_has_every_column() {
        let r = simulate(&experiment(Some(1), 50), None).unwrap();
        let cols = AggregateReport::csv_header().split(',').count();
        assert_eq!(r.csv_row().split(',').count(), cols);
    }
}
