//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Shape or resolution disagreement between inputs.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An argument violated its contract (non-positive size, bad range, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input too small or empty for the requested operation.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// No unvisited feasible candidate remains; the policy must stop.
    #[error("candidate set exhausted")]
    CandidatesExhausted,

    /// Malformed file contents (bad magic, truncated payload, ...).
    #[error("format error in {path}: {reason}")]
    Format { path: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Stable one-word category used by the CLI for exit diagnostics.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Parameter(_) => "parameter",
            Error::DegenerateInput(_) => "degenerate-input",
            Error::CandidatesExhausted => "exhausted",
            Error::Format { .. } => "format",
            Error::Io { .. } => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
