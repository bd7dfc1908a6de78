use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("invalid protocol parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot combine a state vector with a density matrix")]
    MixedKinds,

    #[error("transcript is incomplete: {0}")]
    IncompleteTranscript(String),

    /// Signals a bug in the simulator rather than a protocol event.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}
