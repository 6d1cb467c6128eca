use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the domain of a numeric routine.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    /// Element set too far from its epoch for the mean-element propagator.
    #[error("element set is stale: {age_days:.3} days from epoch (limit {limit_days} days)")]
    Stale { age_days: f64, limit_days: f64 },

    #[error("configuration error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("TLE parse error at line {line}: {message}")]
    Tle { line: usize, message: String },

    #[error("input data error: {0}")]
    InputData(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An internal invariant was broken.
    #[error("integrity violation: {0}")]
    Integrity(String),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 configuration, 2 input data, 3 internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 1,
            Error::Integrity(_) => 3,
            Error::Domain(_)
            | Error::Unsupported(_)
            | Error::Stale { .. }
            | Error::Tle { .. }
            | Error::InputData(_)
            | Error::Degenerate(_)
            | Error::Io { .. } => 2,
        }
    }
}
