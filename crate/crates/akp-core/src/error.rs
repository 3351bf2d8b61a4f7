use thiserror::Error;

/// Errors raised by the numeric and analytics layers.
#[derive(Error, Debug)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("label {0} outside {{0, 1}}")]
    InvalidLabel(usize),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("swap policy error: {0}")]
    Policy(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),
    #[error("snapshots not comparable: {0}")]
    Comparability(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("image format error: {0}")]
    ImageFormat(String),
    #[error("stratification error: {0}")]
    Stratification(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
