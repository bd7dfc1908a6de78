use std::path::PathBuf;

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("check failed: {0}")]
    Check(String),

    #[error(transparent)]
    Core(#[from] qcoin_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 1 for failed checks and internal errors, 2 for bad input, 3 for I/O.
    pub fn exit_code(&self) -> i32 {
        use qcoin_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Check(_) => 1,
            CliError::Core(E::InvalidParams(_) | E::InvalidArgument(_) | E::DimensionMismatch { .. }) => 2,
            CliError::Core(_) => 1,
        }
    }
}
