//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration (widths, temperatures, dataset specs, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A non-finite value showed up during evaluation. `layer` is 1-based.
    #[error("non-finite value at layer {layer}")]
    NonFinite { layer: usize },

    /// Input length does not match the expected dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A circuit or parameter index is out of range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// Exact circuit enumeration was requested above the configured cap.
    #[error("circuit count {count} exceeds enumeration cap {cap}")]
    CapExceeded { count: u128, cap: u128 },

    /// A within-layer second derivative was requested; it is identically zero
    /// and must not be asked for.
    #[error("within-layer Hessian entry requested at layer {layer}")]
    WithinLayer { layer: usize },

    /// Spectral-density grid is not symmetric about zero.
    #[error("grid is not symmetric about zero")]
    AsymmetricGrid,

    /// A symmetric-matrix routine was handed a non-symmetric matrix.
    #[error("matrix is not symmetric (max |A - A^T| = {max_dev})")]
    NotSymmetric { max_dev: f64 },

    /// The QL iteration failed to converge.
    #[error("eigensolver failure: {0}")]
    Eigen(String),

    /// Malformed CSV input.
    #[error("csv error at line {line}: {message}")]
    Csv { line: usize, message: String },

    /// Training diverged.
    #[error("training diverged at epoch {epoch} (risk {risk})")]
    Diverged { epoch: usize, risk: f64 },

    /// Checkpoint file is corrupt or of an unsupported version.
    #[error("bad checkpoint: {0}")]
    BadCheckpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
