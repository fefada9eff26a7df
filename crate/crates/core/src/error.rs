use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid data at row {row}, column {column}: {reason}")]
    InvalidData {
        row: usize,
        column: usize,
        reason: String,
    },

    #[error("invalid dataset shape: {0}")]
    InvalidShape(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("column {column} has zero variance")]
    ZeroVariance { column: usize },

    #[error("matrix is not symmetric: |m[{row},{col}] - m[{col},{row}]| = {gap:e}")]
    Asymmetric { row: usize, col: usize, gap: f64 },

    #[error("matrix is not a correlation matrix: {0}")]
    NotCorrelation(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("identity target has no structure parameter")]
    NoParameter,

    #[error("structure parameter is undefined for p = {p}")]
    UndefinedParameter { p: usize },

    #[error("invalid target: {0}")]
    InvalidTarget(String),

    #[error("target parameter t = {t} is within the near-singular margin of its validity boundary")]
    NearSingular { t: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("group labels are required")]
    MissingLabels,

    #[error("group {label} has {size} row(s); at least {min} required")]
    SmallGroup { label: usize, size: usize, min: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("csv error at line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),
}
