use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("bit vector length {0} out of range 1..=512")]
    BitVecLength(usize),
    #[error("bit index {index} out of range for length {len}")]
    BitIndex { index: usize, len: usize },
    #[error("length mismatch: {a} vs {b} bits")]
    LengthMismatch { a: usize, b: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("modification bound t={t} exceeds vector length {len}")]
    ModificationBound { t: usize, len: usize },
    #[error("unsupported capture format: {0}")]
    UnsupportedFormat(String),
    #[error("malformed trace data: {0}")]
    MalformedTrace(String),
    #[error("series too short: need at least {need} values, got {got}")]
    SeriesTooShort { need: usize, got: usize },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
