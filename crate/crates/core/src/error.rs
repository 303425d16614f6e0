use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CkdError>;

#[derive(Debug, Error)]
pub enum CkdError {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("sample {row} has no positive label")]
    UnlabeledSample { row: usize },

    #[error("degenerate configuration: {0}")]
    DegenerateConfig(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("model format: {0}")]
    Format(String),
}

impl CkdError {
    pub(crate) fn size(msg: impl Into<String>) -> Self {
        CkdError::InvalidSize(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CkdError::Io {
            path: path.into(),
            source,
        }
    }
}
