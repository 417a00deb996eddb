use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("header mismatch: expected columns {expected:?}, found {found:?}")]
    HeaderMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },

    #[error("cannot parse {value:?} in row {row}, column {column:?}: {reason}")]
    Cell {
        row: usize,
        column: String,
        value: String,
        reason: String,
    },

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("attack {kind} requires {missing}")]
    MissingInput { kind: String, missing: String },

    #[error("{0} is a generator-configuration attack; build it with degraded_config instead")]
    GeneratorConfigAttack(String),

    #[error("degenerate training data: {0}")]
    Degenerate(String),

    #[error("percentage change undefined for baseline {baseline}")]
    UndefinedChange { baseline: f64 },

    #[error("attacked record has no baseline for key {0}")]
    OrphanRecord(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
