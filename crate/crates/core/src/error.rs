use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown region `{0}`")]
    UnknownRegion(String),

    #[error("event {record} lies outside the aggregation span")]
    OutsideSpan { record: String },

    #[error("series `{region}` has no stored scale")]
    MissingScale { region: String },

    #[error("channel `{name}`: {message}")]
    Channel { name: String, message: String },

    #[error("training diverged: {0}")]
    Training(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }

    pub(crate) fn channel(name: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Channel { name: name.into(), message: message.into() }
    }

    /// Process exit code: 2 for bad input or configuration, 1 for computation failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Training(_) => 1,
            _ => 2,
        }
    }
}
