//! Error type shared across the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing value at row {row}, column {column}")]
    MissingValue { row: usize, column: String },

    #[error("expected exactly 2 distinct labels, found {found:?}")]
    NonBinary { found: Vec<String> },

    #[error("cannot parse {value:?} as a number at row {row}, column {column}")]
    ParseError {
        row: usize,
        column: String,
        value: String,
    },

    #[error("class {label:?} has {count} samples, fewer than required {required}")]
    TooFewSamples {
        label: String,
        count: usize,
        required: usize,
    },

    #[error("invalid configuration: {0}")]
    ConfigError(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeError { expected: usize, got: usize },

    #[error("input is empty")]
    EmptyInput,

    #[error("NearMiss version must be 1, 2 or 3, got {0}")]
    BadVersion(u32),

    #[error("invalid neighbor count k={k}: {reason}")]
    BadK { k: usize, reason: String },

    #[error("labels contain a single class")]
    SingleClass,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("scatter output requires exactly 2 features, dataset has {0}")]
    NotTwoDimensional(usize),

    #[error("invalid blob specification: {0}")]
    BadSpec(String),

    #[error("every fold was skipped; no classifier could be trained")]
    AllFoldsSkipped,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("invalid JSON document: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by degenerate data rather than bad arguments.
    pub fn is_degenerate_data(&self) -> bool {
        matches!(
            self,
            Error::TooFewSamples { .. }
                | Error::SingleClass
                | Error::AllFoldsSkipped
                | Error::EmptyInput
        )
    }
}
