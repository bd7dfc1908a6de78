//! Subcommands of `qcoin`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qcoin_core::analysis::{curve, max_bias, optimal_l, uniform_grid, OptimalL, Setting};
use qcoin_core::protocol::ProtocolParams;

use crate::crosscheck::{crosscheck_with, ClosedForms, CrosscheckReport, Sweep};
use crate::error::{CliError, CliResult};
use crate::format::{curve_csv, sig};
use crate::montecarlo::{simulate, AggregateReport, Experiment};

#[derive(Debug, Parser)]
#[command(name = "qcoin", version, about = "Simulate and analyze a cheating strategy against quantum coin tossing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run many seeded protocol runs and compare the outcome rate with the bound.
    Simulate(SimulateArgs),
    /// Tabulate the bias curve over a uniform grid of K.
    Curve(CurveArgs),
    /// Locate the maximum of the bias curve.
    Optimize(OptimizeArgs),
    /// Compare closed forms and the compressed simulation with dense oracles.
    Crosscheck(CrosscheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// c², strictly between ½ and 1.
    #[arg(long, default_value_t = 0.9)]
    pub c2: f64,
    /// Qubits per committed bit.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Bit rounds.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// Attack round.
    #[arg(long, default_value_t = 1)]
    pub l: usize,
    /// Number of independent runs.
    #[arg(long, default_value_t = 10_000)]
    pub runs: u64,
    /// Base seed; run i uses seed XOR i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Result the cheater aims for.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    pub target: u8,
    /// Both parties follow the protocol.
    #[arg(long)]
    pub honest: bool,
    /// Write one JSON transcript per run here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Format of the report printed on stdout.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Grid points `K_i = i/(N+1)`.
    #[arg(long, default_value_t = 99)]
    pub grid: usize,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Also report the best attack round for this many rounds.
    #[arg(long)]
    pub m: Option<usize>,
    /// c² for the attack round; `c² − s² = cos(π/9)` when omitted.
    #[arg(long, requires = "m")]
    pub c2: Option<f64>,
    /// Qubits per bit for the attack round; `log₂ m` when omitted.
    #[arg(long, requires = "m")]
    pub n: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrosscheckArgs {
    /// Longest parity string.
    #[arg(long, default_value_t = 6)]
    pub q_max: usize,
    /// c² values to sweep.
    #[arg(long, num_args = 1.., default_values_t = [0.6, 0.75, 0.9])]
    pub c2: Vec<f64>,
    /// Qubits per committed bit to sweep.
    #[arg(long, num_args = 1.., default_values_t = [1usize, 2])]
    pub n: Vec<usize>,
    /// Seeded branches replayed per protocol configuration.
    #[arg(long, default_value_t = 4)]
    pub seeds: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Evaluate the closed forms one bit too long, to see the check fail.
    #[arg(long, hide = true)]
    pub perturb: bool,
}

/// A validated `simulate` invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ProtocolParams,
    pub honest: bool,
    pub target: u8,
    pub runs: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl TryFrom<&SimulateArgs> for RunConfig {
    type Error = CliError;

    fn try_from(a: &SimulateArgs) -> CliResult<Self> {
        if !(a.c2 > 0.5 && a.c2 < 1.0) {
            return Err(CliError::Usage(format!("--c2 {} must lie strictly between 0.5 and 1", a.c2)));
        }
        if a.runs == 0 {
            return Err(CliError::Usage("--runs must be at least 1".into()));
        }
        let params = ProtocolParams::from_c2(a.c2, a.n, a.m, a.l).map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(RunConfig {
            params,
            honest: a.honest,
            target: a.target,
            runs: a.runs,
            seed: a.seed,
            out: a.out.clone(),
            format: a.format,
        })
    }
}

/// Runs a command, printing its report to `stdout`. Returns whether every
/// check the command makes passed.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> CliResult<bool> {
    match &cli.command {
        Command::Simulate(a) => {
            let report = cmd_simulate(&RunConfig::try_from(a)?)?;
            let text = match a.format {
                Format::Json => to_json(&report)?,
                Format::Csv => format!("{}\n{}", AggregateReport::csv_header(), report.csv_row()),
            };
            emit(stdout, &text)?;
            Ok(report.pass)
        }
        Command::Curve(a) => {
            let text = cmd_curve(a.grid, a.format)?;
            write_to(a.out.as_ref(), stdout, &text)?;
            Ok(true)
        }
        Command::Optimize(a) => {
            let report = cmd_optimize(a)?;
            write_to(a.out.as_ref(), stdout, &to_json(&report)?)?;
            Ok(true)
        }
        Command::Crosscheck(a) => {
            let report = cmd_crosscheck(a)?;
            write_to(a.out.as_ref(), stdout, &to_json(&report)?)?;
            Ok(report.pass)
        }
    }
}

pub fn cmd_simulate(cfg: &RunConfig) -> CliResult<AggregateReport> {
    let e =
        Experiment { params: cfg.params, target: (!cfg.honest).then_some(cfg.target), runs: cfg.runs, seed: cfg.seed };
    match &cfg.out {
        Some(path) => {
            let file = File::create(path).map_err(|err| CliError::io(path, err))?;
            let mut w = BufWriter::new(file);
            let report = simulate(&e, Some(&mut w))?;
            w.flush().map_err(|err| CliError::io(path, err))?;
            Ok(report)
        }
        None => simulate(&e, None),
    }
}

pub fn cmd_curve(grid: usize, format: Format) -> CliResult<String> {
    if grid == 0 {
        return Err(CliError::Usage("--grid must be at least 1".into()));
    }
    let points = curve(&uniform_grid(grid))?;
    Ok(match format {
        Format::Csv => curve_csv(&points),
        Format::Json => {
            let rows: Vec<CurveRow> = points.iter().map(|p| CurveRow { k: p.k, p0: p.p0, bias: p.bias }).collect();
            to_json(&rows)?
        }
    })
}

#[derive(Serialize)]
struct CurveRow {
    #[serde(rename = "K", serialize_with = "sig::serialize")]
    k: f64,
    #[serde(serialize_with = "sig::serialize")]
    p0: f64,
    #[serde(serialize_with = "sig::serialize")]
    bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeReport {
    #[serde(rename = "K_star", serialize_with = "sig::serialize")]
    pub k_star: f64,
    #[serde(serialize_with = "sig::serialize")]
    pub bias_star: f64,
    #[serde(serialize_with = "sig::serialize")]
    pub alpha_star: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimal_l: Option<OptimalLReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalLReport {
    pub m: usize,
    /// Rounds left unrevealed at the attack, as a real number.
    #[serde(serialize_with = "sig::serialize")]
    pub unrevealed: f64,
    pub l: usize,
    #[serde(rename = "K_implied", serialize_with = "sig::serialize")]
    pub k_implied: f64,
    #[serde(serialize_with = "sig::serialize")]
    pub p0: f64,
    #[serde(serialize_with = "sig::serialize")]
    pub bias: f64,
}

impl From<OptimalL> for OptimalLReport {
    fn from(o: OptimalL) -> Self {
        OptimalLReport { m: o.m, unrevealed: o.unrevealed, l: o.l, k_implied: o.k_implied, p0: o.p0, bias: o.bias }
    }
}

pub fn cmd_optimize(a: &OptimizeArgs) -> CliResult<OptimizeReport> {
    let opt = max_bias();
    let optimal_l = match a.m {
        None => None,
        Some(m) => {
            let setting = match (a.c2, a.n) {
                (None, None) => Setting::Standard,
                (c2, n) => {
                    let c2 = c2.unwrap_or_else(|| 0.5 * (1.0 + (std::f64::consts::PI / 9.0).cos()));
                    if !(c2 > 0.5 && c2 < 1.0) {
                        return Err(CliError::Usage(format!("--c2 {c2} must lie strictly between 0.5 and 1")));
                    }
                    let n = n.unwrap_or((m as f64).log2());
                    if !(n > 0.0) {
                        return Err(CliError::Usage(format!("--n {n} must be positive")));
                    }
                    Setting::Custom { overlap: 2.0 * c2 - 1.0, n }
                }
            };
            Some(optimal_l(m, setting).map_err(|e| CliError::Usage(e.to_string()))?.into())
        }
    };
    Ok(OptimizeReport { k_star: opt.k_star, bias_star: opt.bias_star, alpha_star: opt.alpha_star, optimal_l })
}

pub fn cmd_crosscheck(a: &CrosscheckArgs) -> CliResult<CrosscheckReport> {
    let sweep = Sweep { q_max: a.q_max, c2: a.c2.clone(), n: a.n.clone(), trace_seeds: a.seeds };
    let forms = if a.perturb { ClosedForms::off_by_one() } else { ClosedForms::exact() };
    crosscheck_with(&sweep, &forms)
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Check(format!("serializing the report: {e}")))
}

fn emit(w: &mut dyn Write, text: &str) -> CliResult<()> {
    let newline = if text.ends_with('\n') { "" } else { "\n" };
    write!(w, "{text}{newline}").map_err(|err| CliError::io("stdout", err))
}

fn write_to(path: Option<&PathBuf>, stdout: &mut dyn Write, text: &str) -> CliResult<()> {
    match path {
        Some(p) => {
            let newline = if text.ends_with('\n') { "" } else { "\n" };
            std::fs::write(p, format!("{text}{newline}")).map_err(|err| CliError::io(p, err))
        }
        None => emit(stdout, text),
    }
}
