use thiserror::Error;

/// Errors surfaced by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("matrix is not hermitian: deviation {deviation:e} exceeds tolerance {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("matrix is not positive semidefinite: eigenvalue {min:e} below -{tol:e}")]
    NotPsd { min: f64, tol: f64 },
    #[error("spectral collision: z = {z} lies within {distance:e} of the spectrum")]
    SpectralCollision { z: String, distance: f64 },
    #[error("eigensystem is defective or ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),
    #[error("support overflow: {size} terms exceeds the cap of {cap}")]
    SupportOverflow { size: usize, cap: usize },
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
