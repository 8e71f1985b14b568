use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A generator or configuration parameter is outside its valid range.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("graph is not connected: {0}")]
    Connectivity(String),
    /// The request exceeds an exhaustive-search or dense-solve cap.
    #[error("capability exceeded: {0}")]
    Capability(String),
    #[error("invalid run configuration: {0}")]
    Config(String),
    /// A block failed the validity predicate an operation requires.
    #[error("invalid block: {0}")]
    Validity(String),
    #[error("block integrity violated: {0}")]
    Integrity(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("no convergence after {steps} steps")]
    NonConvergence { steps: u64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
