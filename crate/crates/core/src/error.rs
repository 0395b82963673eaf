use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QdsError {
    /// A curve, map or experiment description is not valid.
    #[error("configuration error: {0}")]
    Config(String),
    /// An operation was called with arguments outside its domain.
    #[error("usage error: {0}")]
    Usage(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("power iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, QdsError>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(QdsError::Config(msg.into()))
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(QdsError::Usage(msg.into()))
}
