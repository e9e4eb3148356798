//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by configuration parsing, model evaluation, the convex
/// subsolvers, and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid or inconsistent scenario configuration. The message names the
    /// offending field.
    #[error("configuration error: {0}")]
    Config(String),

    /// A matrix or vector does not have the shape implied by the scenario.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An operation was called in a transmission mode that does not support
    /// it (e.g. assembling the relay subproblem in single-hop mode).
    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    /// A quantity left its mathematical domain (e.g. a nonpositive scaling
    /// factor where a logarithm is required).
    #[error("domain error: {0}")]
    Domain(String),

    /// The effective useful link vanished (`u*q = 0`), so the optimal
    /// scaling factor is undefined for this mobile station.
    #[error("degenerate link for mobile station {ms}: u*q = 0")]
    DegenerateLink {
        /// 0-based mobile-station index.
        ms: usize,
    },

    /// Numerical failure inside a convex subsolver (factorization failure,
    /// multiplier bracket exhausted, dual ascent not converging).
    #[error("solver failure: {0}")]
    Solver(String),

    /// I/O failure, annotated with the path involved.
    #[error("i/o error at {path}: {source}")]
    Io {
        /// File or directory the operation touched.
        path: PathBuf,
        /// Underlying OS error.
        #[source]
        source: std::io::Error,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Convenience constructor for [`Error::Io`].
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
