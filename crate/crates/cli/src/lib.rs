//! Library behind the `qcoin` binary: Monte Carlo experiments, the
//! closed-form crosscheck, and output formatting.

pub mod commands;
pub mod crosscheck;
pub mod error;
pub mod format;
pub mod montecarlo;

pub use commands::{execute, Cli, Command, RunConfig};
pub use error::{CliError, CliResult};
