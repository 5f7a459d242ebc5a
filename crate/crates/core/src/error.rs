use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument or configuration value is out of range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A (question, transform) context was requested that the policy or
    /// weight table does not cover.
    #[error("missing context: question {qid}, transform {tidx}")]
    Coverage { qid: u64, tidx: usize },

    /// A config or document failed validation; carries every offending key.
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
