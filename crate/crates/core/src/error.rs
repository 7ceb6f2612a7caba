use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the range the construction is defined for.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0} (only 2 and 3 are supported)")]
    UnsupportedDimension(usize),

    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Column sums of a table differ or vanish, so it is not a protocol table.
    #[error("column sums are not equal and nonzero: {0:?}")]
    UnequalColumnSums(Vec<f64>),

    #[error("grid is empty")]
    EmptyGrid,

    /// No conclusive key position is available to estimate the error rate.
    #[error("no conclusive positions available for error estimation")]
    NoConclusive,

    /// Alice holds no usable conclusive bit; the session must be restarted.
    #[error("no usable conclusive key bit; restart the key distribution")]
    Restart,

    #[error("query index {index} out of range for database of {len} bits")]
    QueryIndex { index: usize, len: usize },

    #[error("database parse error: {0}")]
    Database(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
