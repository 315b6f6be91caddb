use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid signal: {0}")]
    InvalidSignal(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("entropy undefined for an all-zero cube")]
    ZeroCube,
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Validation errors map to exit code 2, I/O and parse errors to 3.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Parse { .. })
    }
}
