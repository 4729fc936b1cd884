use thiserror::Error;

/// Errors raised by grid, symbol, and operator routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("rank mismatch: {0} vs {1}")]
    Rank(usize, usize),
    #[error("out of range: {0}")]
    Range(String),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("compatibility violated: deviation {deviation:.3e} at {point}")]
    Incompatible { deviation: f64, point: String },
    #[error("not invertible: {0}")]
    Singular(String),
    #[error("not supported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
