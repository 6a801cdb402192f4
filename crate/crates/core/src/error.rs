//! Crate-wide error type.
//!
//! Variants are grouped by how callers are expected to react: `Config`-class
//! errors mean the request itself was malformed, `Io`/`Format` mean a file
//! could not be produced or understood, and `NumericalFailure` means an
//! iteration produced non-finite values and the run was aborted.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter, dimension mismatch, or malformed configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Underlying file-system failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A file exists but its contents do not match the expected layout.
    #[error("format error: {0}")]
    Format(String),

    /// A ray parallel to the reference planes cannot be expressed in
    /// two-plane coordinates.
    #[error("degenerate ray: direction is parallel to the parameterization planes")]
    DegenerateRay,

    /// Non-finite intensities appeared during iteration; the run is aborted
    /// rather than letting NaNs propagate silently.
    #[error("numerical failure: non-finite value detected at iteration {iteration}")]
    NumericalFailure { iteration: usize },
}

impl Error {
    /// Shorthand for a `Config` error.
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Shorthand for a `Format` error.
    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
