//! Numerical tolerances used across the crate.
//!
//! Three knobs cover every routine: an eigenvalue floor for positivity
//! checks, a relative cutoff for numerical rank decisions, and a relative
//! Frobenius tolerance for round-trip and residual checks.

use crate::error::{Error, Result};

/// Relative eigenvalue floor for PSD checks (exact linear algebra scale).
pub const DEFAULT_PSD_EIG_TOL: f64 = 1e-10;
/// Relative singular value cutoff for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Relative Frobenius tolerance for reconstructions and residuals.
pub const DEFAULT_RECON_TOL: f64 = 1e-8;

/// Tolerance bundle passed to every numerical routine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Eigenvalues above `-psd_eig_tol * max(1, ||A||)` count as nonnegative.
    pub psd_eig_tol: f64,
    /// Singular values above `rank_tol * sigma_max` count toward the rank.
    pub rank_tol: f64,
    /// Round-trip Frobenius tolerance, relative to the input scale.
    pub recon_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            psd_eig_tol: DEFAULT_PSD_EIG_TOL,
            rank_tol: DEFAULT_RANK_TOL,
            recon_tol: DEFAULT_RECON_TOL,
        }
    }
}

impl Tolerances {
    /// Builds a tolerance bundle, rejecting negative or non-finite values.
    pub fn new(psd_eig_tol: f64, rank_tol: f64, recon_tol: f64) -> Result<Self> {
        for (name, v) in [
            ("psd_eig_tol", psd_eig_tol),
            ("rank_tol", rank_tol),
            ("recon_tol", recon_tol),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(Tolerances { psd_eig_tol, rank_tol, recon_tol })
    }

    /// Threshold below which a defect-chain product counts as degenerate.
    pub(crate) fn chain_floor(&self) -> f64 {
        10.0 * self.rank_tol
    }
}
