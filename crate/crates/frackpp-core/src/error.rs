//! Crate-wide error type.

use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Operation requires state that has not been built (e.g. a kernel table).
    #[error("state error: {0}")]
    State(String),
    /// Parameter combination the implementation does not cover.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Invalid or inconsistent simulation configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Tabulation or calibration failed to converge.
    #[error("build error: {0}")]
    Build(String),
    /// Rate fitting failed (too few samples, nonpositive positions, ...).
    #[error("fit error: {0}")]
    Fit(String),
    /// A function handed to a quadrature produced non-finite values.
    #[error("evaluation error: {0}")]
    Eval(String),
    /// Two objects live on different grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
