//! Error types shared across the crate.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by dataset handling, statistics, model fitting, and the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input file or directory problems.
    Io(String),
    /// Malformed input data (missing columns, bad numbers, duplicate keys).
    Format(String),
    /// Periods within a series are not contiguous or are duplicated.
    Gap(String),
    /// A precondition on an operation's input was violated.
    Precondition(String),
    /// A series has zero variance where variation is required.
    DegenerateSeries(String),
    /// Linear system is rank deficient; names the offending columns.
    Singular { columns: Vec<usize> },
    /// Iterative fit failed to converge.
    Convergence(String),
    /// Invalid model, clustering, or experiment configuration.
    Config(String),
    /// Tensor/vector shape mismatch in network operations.
    Shape(String),
    /// Training diverged (NaN loss).
    Divergence(String),
    /// No clustering satisfies the maintenance budget.
    Budget(String),
    /// Residual mode unusable for the data (e.g. nonpositive values under multiplicative).
    ResidualMode(String),
    /// Requested strategy cannot run with the given stage-one model.
    Strategy(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Io(msg) => write!(f, "io error: {msg}"),
            Error::Format(msg) => write!(f, "format error: {msg}"),
            Error::Gap(msg) => write!(f, "gap error: {msg}"),
            Error::Precondition(msg) => write!(f, "precondition violated: {msg}"),
            Error::DegenerateSeries(msg) => write!(f, "degenerate series: {msg}"),
            Error::Singular { columns } => {
                write!(f, "singular design matrix; offending columns: {columns:?}")
            }
            Error::Convergence(msg) => write!(f, "convergence failure: {msg}"),
            Error::Config(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Shape(msg) => write!(f, "shape mismatch: {msg}"),
            Error::Divergence(msg) => write!(f, "training diverged: {msg}"),
            Error::Budget(msg) => write!(f, "maintenance budget: {msg}"),
            Error::ResidualMode(msg) => write!(f, "residual mode: {msg}"),
            Error::Strategy(msg) => write!(f, "strategy: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
