use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("vectors must have at least one coordinate")]
    EmptyVector,

    #[error("exponent p = {0} is outside (1, inf)")]
    InvalidExponent(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("point lies outside the mapping domain: {0}")]
    OutsideDomain(String),

    #[error("mapping is not a self-map of its domain: {0}")]
    NotSelfMap(String),

    #[error("supplied point is not a fixed point (residual {residual:e})")]
    NotFixedPoint { residual: f64 },

    #[error("pair is not comparable under the cone order")]
    IncomparablePair,

    #[error("search region is unbounded")]
    UnboundedRegion,

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
