//! Error type shared by every module in the crate.

use thiserror::Error;

/// Failure modes of the parametrization and state routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("matrix entry is not finite")]
    NonFinite,

    #[error("matrix is not Hermitian: asymmetry {asymmetry:.3e} exceeds floor {floor:.3e}")]
    NotHermitian { asymmetry: f64, floor: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:.3e} below floor {floor:.3e}")]
    NotPsd { eigenvalue: f64, floor: f64 },

    #[error("block matrix is not PSD: contraction norm {norm:.12} exceeds 1")]
    NotContraction { norm: f64 },

    #[error("row is not a contraction: norm {norm:.12} exceeds 1")]
    RowNotContraction { norm: f64 },

    #[error("off-diagonal data inconsistent with the diagonal ranges: residual {residual:.3e} exceeds {tol:.3e}")]
    RangeMismatch { residual: f64, tol: f64 },

    #[error("decomposition residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error("no model exists for this input: reconstruction residual {residual:.3e} exceeds {tol:.3e}")]
    ExtractionFailed { residual: f64, tol: f64 },

    #[error("rank-deficient leading block at order {order}")]
    RankDeficient { order: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("not a density matrix: {0}")]
    InvalidDensity(String),

    #[error("generator produced degenerate draws for {attempts} attempts")]
    DegenerateDraw { attempts: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Convenience constructor for dimension mismatches.
    pub fn dims(context: impl Into<String>) -> Self {
        Error::DimensionMismatch { context: context.into() }
    }
}
