use thiserror::Error;

/// Harness failures, split so the CLI can map configuration problems and
/// runtime problems to different exit codes.
#[derive(Error, Debug)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error(transparent)]
    Core(#[from] akp_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
