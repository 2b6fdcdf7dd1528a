//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("csv header mismatch: expected {expected:?}, found {found:?}")]
    HeaderMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },

    #[error("row {row}: column {column:?} has value {value:?} outside the schema's allowed set")]
    UnknownCategory {
        row: usize,
        column: String,
        value: String,
    },

    #[error("row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("empty dataset: {0}")]
    EmptyDataset(&'static str),

    #[error("invalid marginals for column {column:?}: {reason}")]
    InvalidMarginal { column: String, reason: String },

    #[error("column {column:?} has no observed categories and smoothing is disabled")]
    DegenerateColumn { column: String },

    #[error("external pool exhausted for {pattern}: needed {needed}, {available} left")]
    PoolExhausted {
        pattern: String,
        needed: usize,
        available: usize,
    },

    #[error("discriminator needs both classes non-empty")]
    SingleClass,

    #[error(
        "one-class SVM did not converge: KKT residual {residual:.3e} after {iterations} iterations"
    )]
    NotConverged { residual: f64, iterations: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("reports cover different attribute sets: {before:?} vs {after:?}")]
    AttributeSetMismatch {
        before: Vec<String>,
        after: Vec<String>,
    },

    #[error("malformed report: {0}")]
    MalformedReport(String),
}
