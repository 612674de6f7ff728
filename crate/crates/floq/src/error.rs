//! Error taxonomy shared by every module.
//!
//! Variants are grouped by how a caller should react: configuration and index
//! errors are usage mistakes, contract violations indicate a numerical
//! precondition was broken (non-Hermitian input, non-unitary propagator),
//! and boundary/gap-closing errors flag parameter sets where a requested
//! quantity is mathematically undefined rather than miscomputed.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model or run configuration (even `n_l`, empty branch, bad grid …).
    #[error("configuration error: {0}")]
    Config(String),

    /// A site or bond reference outside the declared lattice.
    #[error("index error: {0}")]
    Index(String),

    /// A numerical precondition was violated (non-Hermitian matrix,
    /// non-unitary propagator, mismatched dimensions).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Parameters sit on a phase boundary where the requested invariant
    /// is undefined.
    #[error("boundary parameter: {0}")]
    Boundary(String),

    /// The winding computation hit a (near-)zero matrix entry: the
    /// quasienergy gap closes and the invariant is undefined.
    #[error("gap closing at k = {k}: |entry| = {magnitude:.3e}")]
    GapClosing { k: f64, magnitude: f64 },

    #[error("linear algebra backend error: {0}")]
    Backend(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub fn index(msg: impl Into<String>) -> Self {
        Error::Index(msg.into())
    }
    pub fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
    pub fn boundary(msg: impl Into<String>) -> Self {
        Error::Boundary(msg.into())
    }
    pub fn backend(msg: impl Into<String>) -> Self {
        Error::Backend(msg.into())
    }
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Backend(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
