use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid source family: {0}")]
    InvalidFamily(String),

    #[error("invalid weight parameters: {0}")]
    InvalidWeights(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empirical measure requires at least one finite value")]
    EmptyMeasure,

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("config error: {0}")]
    ConfigGeneral(String),

    #[error("csv error in {path}: {msg}")]
    Csv { path: PathBuf, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by user input rather than a runtime failure.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidFamily(_)
                | Error::InvalidWeights(_)
                | Error::InvalidSchedule(_)
                | Error::InvalidParameter(_)
                | Error::Config { .. }
                | Error::ConfigGeneral(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
