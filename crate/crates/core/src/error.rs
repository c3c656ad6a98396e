use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("row {row}: cannot parse {value:?} in column {column:?} as a number")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}: unknown level {value:?} for categorical feature {feature:?}")]
    Level {
        row: usize,
        feature: String,
        value: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("oracle protocol error at row {row}: {message}")]
    OracleProtocol { row: usize, message: String },

    #[error("oracle data error at row {row}: label {value:?} is not a finite number")]
    OracleData { row: usize, value: String },

    #[error("augmentation error: {0}")]
    Augmentation(String),

    #[error("model file error: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
