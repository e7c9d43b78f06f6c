use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid layer stack: {0}")]
    Architecture(String),

    #[error("batch of {rows} row(s) cannot be normalized in train mode; need at least 2")]
    BatchTooSmall { rows: usize },

    #[error("activation cache does not match this network: {0}")]
    CacheMismatch(String),

    #[error("non-finite value produced in {0}")]
    NonFinite(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error at data row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("not enough records: {0}")]
    Insufficient(String),

    #[error("training set contains a fraudulent record at position {0}")]
    FraudInTraining(usize),

    #[error("singular normal equations; use a ridge strength lambda > 0")]
    Singular,

    #[error("unsupported model file version {found} (expected {expected})")]
    Version { found: u64, expected: u64 },

    #[error("corrupt model file: {0}")]
    Corrupt(String),

    #[error("data fingerprint mismatch: model has {model}, data has {data}")]
    Fingerprint { model: String, data: String },

    #[error("model has not been trained")]
    Untrained,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
