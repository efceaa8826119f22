use gpls::GplsError;
use thiserror::Error;

/// Failure of a command, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or arguments (exit code 2).
    #[error("usage error: {0}")]
    Usage(String),
    /// Unreadable or malformed input, or an output that cannot be written
    /// (exit code 3).
    #[error("data error: {0}")]
    Data(String),
    /// The numerics failed: corank mismatch, non-convergence, degeneracy
    /// (exit code 4).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub(crate) fn data(msg: impl std::fmt::Display) -> Self {
        CliError::Data(msg.to_string())
    }
}

impl From<GplsError> for CliError {
    fn from(e: GplsError) -> Self {
        if e.is_numerical() {
            return CliError::Numerical(e.to_string());
        }
        match e {
            GplsError::Domain(_)
            | GplsError::DimensionMismatch { .. }
            | GplsError::UnsupportedOracle(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
