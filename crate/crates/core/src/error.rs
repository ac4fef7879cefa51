use thiserror::Error;

/// Errors produced by the beamforming toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical routine failed (non-definite matrix, no convergence, ...).
    #[error("numerical error: {0}")]
    Numerical(String),
    /// Steering vectors (or another basis) are linearly dependent.
    #[error("rank error: {0}")]
    Rank(String),
    /// An experiment or design configuration is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
