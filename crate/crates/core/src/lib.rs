//! Parametrizations of positive semidefinite matrices.
//!
//! Two coordinate systems for the cone of PSD matrices are implemented side
//! by side: a contraction (Schur-type) parametrization built from a diagonal
//! and a table of complex contractions, and a near-tridiagonal model built
//! from moment-style recurrence coefficients. Both come with extraction,
//! reconstruction, Cholesky and determinant routines, plus quantum-state
//! utilities layered on top: Kraus decompositions, a partial-transpose
//! separability check, pattern-structured separable families and a qubit
//! coordinate chart.

pub mod error;
pub mod jacobi;
pub mod matcore;
pub mod qstate;
pub mod random;
pub mod separable;
pub mod sc;
pub mod tolerance;

mod matrix;

pub use error::{Error, Result};
pub use matrix::{Complex64, ComplexMatrix};
pub use tolerance::Tolerances;
