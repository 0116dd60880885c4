//! Contraction parameters for positive semidefinite matrices.
//!
//! A PSD matrix is determined by its diagonal together with one contraction
//! per off-diagonal position: the 2x2 block case says `[[A11, B],[B*, A22]]`
//! is PSD exactly when `B = sqrt(A11) * Gamma * sqrt(A22)` for some `Gamma`
//! with norm at most one, and larger matrices follow by recursing on the
//! trailing block and splitting each row with a defect chain. This module
//! provides the block-level building blocks ([`block_contraction`],
//! [`row_contraction_decompose`]) and the scalar-entry parametrization
//! ([`sc_extract`], [`sc_reconstruct`]) with its Cholesky factor, determinant
//! product formula and rank-one test.

use crate::error::{Error, Result};
use crate::matcore;
use crate::matrix::{Complex64, ComplexMatrix};
use crate::tolerance::{Tolerances, DEFAULT_PSD_EIG_TOL};

/// Diagonal plus upper-triangle contraction table for an `n x n` PSD matrix.
///
/// `diag[i]` holds the diagonal entry `A_ii >= 0`; `gamma(i, j)` for `i < j`
/// is the contraction attached to that position, always of modulus at most
/// one. Whenever `diag[i] * diag[j] == 0` the contraction carries no
/// information and is pinned to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SCParameters {
    n: usize,
    diag: Vec<f64>,
    gammas: Vec<Complex64>,
}

impl SCParameters {
    /// Builds a parameter set from the diagonal and the upper triangle in
    /// row-major order: `(0,1), (0,2), ..., (0,n-1), (1,2), ...`.
    ///
    /// Moduli in `(1, 1 + 1e-10]` are clamped to one (phase kept); anything
    /// larger is rejected. Entries at positions with a zero diagonal pair are
    /// normalized to zero.
    pub fn new(diag: Vec<f64>, gammas: Vec<Complex64>) -> Result<Self> {
        let n = diag.len();
        let expected = n * n.saturating_sub(1) / 2;
        if gammas.len() != expected {
            return Err(Error::InvalidParameters(format!(
                "expected {expected} contractions for size {n}, got {}",
                gammas.len()
            )));
        }
        for (i, d) in diag.iter().enumerate() {
            if !d.is_finite() {
                return Err(Error::NonFinite);
            }
            if *d < 0.0 {
                return Err(Error::InvalidParameters(format!(
                    "diagonal entry {i} is negative ({d})"
                )));
            }
        }
        let mut gammas = gammas;
        for g in gammas.iter_mut() {
            if !g.re.is_finite() || !g.im.is_finite() {
                return Err(Error::NonFinite);
            }
            let m = g.norm();
            if m > 1.0 {
                if m <= 1.0 + DEFAULT_PSD_EIG_TOL {
                    *g /= m;
                } else {
                    return Err(Error::NotContraction { norm: m });
                }
            }
        }
        let mut p = SCParameters { n, diag, gammas };
        for i in 0..n {
            for j in i + 1..n {
                if p.diag[i] == 0.0 || p.diag[j] == 0.0 {
                    let idx = p.index(i, j);
                    p.gammas[idx] = Complex64::new(0.0, 0.0);
                }
            }
        }
        Ok(p)
    }

    /// Matrix size `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// The diagonal entries.
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// Contraction at position `(i, j)`, `i < j`. Panics on a bad index pair.
    pub fn gamma(&self, i: usize, j: usize) -> Complex64 {
        self.gammas[self.index(i, j)]
    }

    /// Upper triangle as a flat row-major slice.
    pub fn gammas_flat(&self) -> &[Complex64] {
        &self.gammas
    }

    /// Position of `(i, j)`, `i < j`, inside the flat upper-triangle storage.
    /// Panics on a bad index pair.
    pub fn flat_index(&self, i: usize, j: usize) -> usize {
        self.index(i, j)
    }

    fn index(&self, i: usize, j: usize) -> usize {
        assert!(i < j && j < self.n, "contraction index ({i},{j}) out of range for n={}", self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }
}

/// A matrix contraction together with its two defect operators.
///
/// For `Gamma` mapping the second space into the first, the defects are
/// `D = (I - Gamma* Gamma)^{1/2}` on the source and
/// `D_adj = (I - Gamma Gamma*)^{1/2}` on the target; they satisfy the
/// intertwining relation `Gamma * D = D_adj * Gamma`.
#[derive(Debug, Clone)]
pub struct BlockContraction {
    gamma: ComplexMatrix,
    defect: ComplexMatrix,
    defect_adj: ComplexMatrix,
}

impl BlockContraction {
    /// Wraps a matrix after checking its spectral norm is at most
    /// `1 + psd_eig_tol`.
    pub fn new(gamma: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let norm = matcore::spectral_norm(&gamma);
        if norm > 1.0 + tol.psd_eig_tol {
            return Err(Error::NotContraction { norm });
        }
        let p = gamma.rows();
        let q = gamma.cols();
        let ident_q = ComplexMatrix::identity(q);
        let ident_p = ComplexMatrix::identity(p);
        let defect = clamped_sqrt(&ident_q.sub(&gamma.adjoint().mul(&gamma)?)?);
        let defect_adj = clamped_sqrt(&ident_p.sub(&gamma.mul(&gamma.adjoint())?)?);
        Ok(BlockContraction { gamma, defect, defect_adj })
    }

    /// The contraction itself.
    pub fn gamma(&self) -> &ComplexMatrix {
        &self.gamma
    }

    /// Source-side defect `(I - Gamma* Gamma)^{1/2}`.
    pub fn defect(&self) -> &ComplexMatrix {
        &self.defect
    }

    /// Target-side defect `(I - Gamma Gamma*)^{1/2}`.
    pub fn defect_adj(&self) -> &ComplexMatrix {
        &self.defect_adj
    }
}

/// Square root of a Hermitian matrix whose eigenvalues may dip a rounding
/// error below zero; negative values are clamped.
fn clamped_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    let sym = m.hermitian_part().expect("square by construction");
    matcore::spectral_map(&sym, |lam| lam.max(0.0).sqrt())
}

/// Extracts the contraction linking the two diagonal blocks of a PSD
/// 2x2 block matrix: `Gamma = pinv_sqrt(A11) * A12 * pinv_sqrt(A22)`.
///
/// The result satisfies `sqrt(A11) * Gamma * sqrt(A22) = A12`; if no
/// contraction can (the off-diagonal block is too large, or sticks out of
/// the ranges of the diagonal blocks), the assembled block matrix was not
/// PSD and an error is returned.
pub fn block_contraction(
    a11: &ComplexMatrix,
    a12: &ComplexMatrix,
    a22: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<BlockContraction> {
    if a12.rows() != a11.rows() || a12.cols() != a22.rows() {
        return Err(Error::dims("off-diagonal block must conform to the diagonal blocks"));
    }
    let gamma = matcore::pinv_sqrt(a11, tol)?
        .mul(a12)?
        .mul(&matcore::pinv_sqrt(a22, tol)?)?;
    let bc = BlockContraction::new(gamma, tol)?;
    let back = matcore::principal_sqrt(a11, tol)?
        .mul(&bc.gamma)?
        .mul(&matcore::principal_sqrt(a22, tol)?)?;
    let residual = back.sub(a12)?.frobenius_norm();
    let scale = a11
        .frobenius_norm()
        .max(a22.frobenius_norm())
        .max(a12.frobenius_norm())
        .max(1.0);
    let bound = tol.recon_tol * scale;
    if residual > bound {
        return Err(Error::RangeMismatch { residual, tol: bound });
    }
    Ok(bc)
}

/// Assembles the PSD 2x2 block matrix `[[A11, B],[B*, A22]]` with
/// `B = sqrt(A11) * Gamma * sqrt(A22)`; the inverse of [`block_contraction`].
pub fn assemble_block_psd(
    a11: &ComplexMatrix,
    a22: &ComplexMatrix,
    gamma: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    if gamma.rows() != a11.rows() || gamma.cols() != a22.rows() {
        return Err(Error::dims("contraction must conform to the diagonal blocks"));
    }
    let bc = BlockContraction::new(gamma.clone(), tol)?;
    let b = matcore::principal_sqrt(a11, tol)?
        .mul(bc.gamma())?
        .mul(&matcore::principal_sqrt(a22, tol)?)?;
    let p = a11.rows();
    let q = a22.rows();
    let mut out = ComplexMatrix::zeros(p + q, p + q);
    out.set_block(0, 0, &a11.hermitian_part()?);
    out.set_block(0, p, &b);
    out.set_block(p, 0, &b.adjoint());
    out.set_block(p, p, &a22.hermitian_part()?);
    Ok(out)
}

/// Splits a row contraction `[T_1 ... T_k]` into independent contractions
/// via the defect chain: `T_1 = Gamma_1` and
/// `T_i = D_adj(Gamma_1) ... D_adj(Gamma_{i-1}) * Gamma_i`.
///
/// Where the chain loses rank the remaining data is recovered by a
/// minimal-norm solve, and positions it cannot determine come out zero.
pub fn row_contraction_decompose(
    blocks: &[ComplexMatrix],
    tol: &Tolerances,
) -> Result<Vec<BlockContraction>> {
    if blocks.is_empty() {
        return Ok(Vec::new());
    }
    let p = blocks[0].rows();
    if blocks.iter().any(|b| b.rows() != p) {
        return Err(Error::dims("row blocks must share their row dimension"));
    }
    let mut gram = ComplexMatrix::zeros(p, p);
    for b in blocks {
        gram = gram.add(&b.mul(&b.adjoint())?)?;
    }
    let row_norm = matcore::spectral_norm(&gram).sqrt();
    if row_norm > 1.0 + tol.psd_eig_tol {
        return Err(Error::RowNotContraction { norm: row_norm });
    }
    let mut chain = ComplexMatrix::identity(p);
    let mut out = Vec::with_capacity(blocks.len());
    for t in blocks {
        let gamma = matcore::pinv(&chain, tol).mul(t)?;
        let bc = BlockContraction::new(gamma, tol)?;
        let residual = chain.mul(bc.gamma())?.sub(t)?.frobenius_norm();
        let bound = tol.recon_tol * t.frobenius_norm().max(1.0);
        if residual > bound {
            return Err(Error::RangeMismatch { residual, tol: bound });
        }
        chain = chain.mul(bc.defect_adj())?;
        out.push(bc);
    }
    Ok(out)
}

/// Rebuilds the row blocks `T_i` from their defect-chain contractions;
/// inverse of [`row_contraction_decompose`].
pub fn row_contraction_assemble(gammas: &[BlockContraction]) -> Result<Vec<ComplexMatrix>> {
    if gammas.is_empty() {
        return Ok(Vec::new());
    }
    let p = gammas[0].gamma().rows();
    if gammas.iter().any(|g| g.gamma().rows() != p) {
        return Err(Error::dims("contractions must share their row dimension"));
    }
    let mut chain = ComplexMatrix::identity(p);
    let mut out = Vec::with_capacity(gammas.len());
    for g in gammas {
        out.push(chain.mul(g.gamma())?);
        chain = chain.mul(g.defect_adj())?;
    }
    Ok(out)
}

/// Extracts the diagonal and contraction table of a PSD matrix.
///
/// Works bottom-up: for each row `k` (last to first) the trailing block
/// `A[k+1.., k+1..]` is factored as `L* L`, the row is solved as
/// `A[k, k+1..] = sqrt(d_k) * R_k * L` with a minimal-norm solve, and `R_k`
/// is peeled into scalar contractions through the defect chain. Rows and
/// columns whose diagonal entry vanishes (relative to the largest one)
/// contribute zero contractions.
pub fn sc_extract(a: &ComplexMatrix, tol: &Tolerances) -> Result<SCParameters> {
    let sym = matcore::ensure_psd(a, tol)?;
    let n = sym.rows();
    let mut diag = vec![0.0f64; n];
    for (i, d) in diag.iter_mut().enumerate() {
        *d = sym.get(i, i).re.max(0.0);
    }
    let max_d = diag.iter().cloned().fold(0.0f64, f64::max);
    let floor_d = tol.psd_eig_tol * max_d;
    let mut gammas = vec![Complex64::new(0.0, 0.0); n * n.saturating_sub(1) / 2];
    if n >= 2 {
        let a_norm = sym.frobenius_norm();
        for k in (0..n - 1).rev() {
            if diag[k] <= floor_d {
                continue;
            }
            let m = n - k - 1;
            let trailing = sym.submatrix(k + 1, n, k + 1, n);
            let l = matcore::psd_factor_upper(&trailing, tol);
            let row = sym.submatrix(k, k + 1, k + 1, n);
            let sqrt_dk = diag[k].sqrt();
            let r = row.mul(&matcore::pinv(&l, tol))?.scale_real(1.0 / sqrt_dk);
            let residual = r.mul(&l)?.scale_real(sqrt_dk).sub(&row)?.frobenius_norm();
            let bound = tol.recon_tol * a_norm;
            if residual > bound {
                return Err(Error::ExtractionFailed { residual, tol: bound });
            }
            let mut chain = 1.0f64;
            for t in 0..m {
                let j = k + 1 + t;
                if diag[j] <= floor_d {
                    continue;
                }
                if chain <= tol.chain_floor() {
                    break; // defect chain exhausted: the rest stays zero
                }
                let mut g = r.get(0, t) / chain;
                let gn = g.norm();
                if gn > 1.0 {
                    if gn <= 1.0 + tol.psd_eig_tol {
                        g /= gn;
                    } else {
                        return Err(Error::RowNotContraction { norm: gn });
                    }
                }
                gammas[k * (2 * n - k - 1) / 2 + (j - k - 1)] = g;
                chain *= (1.0 - g.norm_sqr()).max(0.0).sqrt();
            }
        }
    }
    SCParameters::new(diag, gammas)
}

/// Rebuilds the unique PSD matrix with the given diagonal and contraction
/// table, running the extraction recursion forward from the trailing entry.
pub fn sc_reconstruct(p: &SCParameters) -> ComplexMatrix {
    let tol = Tolerances::default();
    let n = p.n();
    if n == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    let mut acc = ComplexMatrix::zeros(1, 1);
    acc.set(0, 0, Complex64::new(p.diag()[n - 1], 0.0));
    for k in (0..n - 1).rev() {
        let m = n - k - 1;
        let l = matcore::psd_factor_upper(&acc, &tol);
        let mut r = ComplexMatrix::zeros(1, m);
        let mut chain = 1.0f64;
        for t in 0..m {
            let g = p.gamma(k, k + 1 + t);
            r.set(0, t, g * chain);
            chain *= (1.0 - g.norm_sqr()).max(0.0).sqrt();
        }
        let row = r.mul(&l).expect("conformable").scale_real(p.diag()[k].sqrt());
        let mut next = ComplexMatrix::zeros(m + 1, m + 1);
        next.set(0, 0, Complex64::new(p.diag()[k], 0.0));
        next.set_block(0, 1, &row);
        next.set_block(1, 0, &row.adjoint());
        next.set_block(1, 1, &acc);
        acc = next;
    }
    acc
}

/// Upper-triangular factor `F` with nonnegative diagonal and
/// `F* F = sc_reconstruct(p)`.
///
/// Its diagonal satisfies `F_kk^2 = d_k * prod_{i<k} (1 - |Gamma_ik|^2)`, so
/// a row of `F` dies exactly when some contraction above that position
/// saturates.
pub fn sc_cholesky(p: &SCParameters) -> ComplexMatrix {
    let tol = Tolerances::default();
    matcore::psd_factor_upper(&sc_reconstruct(p), &tol)
}

/// Determinant of the parametrized matrix:
/// `prod_i d_i * prod_{i<j} (1 - |Gamma_ij|^2)`.
pub fn sc_determinant(p: &SCParameters) -> f64 {
    let mut det = 1.0f64;
    for d in p.diag() {
        det *= d;
    }
    for g in p.gammas_flat() {
        det *= (1.0 - g.norm_sqr()).max(0.0);
    }
    det
}

/// Parameter-level rank-one test.
///
/// With the zero-diagonal rows discarded, the matrix is rank one exactly
/// when every contraction linking two consecutive surviving indices
/// saturates (`|Gamma| = 1` within tolerance): each saturation makes a
/// consecutive pair of Gram vectors parallel, and the chain of pairs ties
/// all surviving rows together.
pub fn sc_is_rank_one(p: &SCParameters, tol: &Tolerances) -> Result<bool> {
    let max_d = p.diag().iter().cloned().fold(0.0f64, f64::max);
    if max_d <= 0.0 {
        return Err(Error::InvalidParameters(
            "rank-one test needs at least one positive diagonal entry".into(),
        ));
    }
    let floor = tol.psd_eig_tol * max_d;
    let live: Vec<usize> = (0..p.n()).filter(|&i| p.diag()[i] > floor).collect();
    for w in live.windows(2) {
        let g = p.gamma(w[0], w[1]);
        if 1.0 - g.norm_sqr() > tol.recon_tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Marks which table entries carry information, mirroring the pinning rules
/// of [`sc_extract`]: an entry is undetermined (false) when either diagonal
/// endpoint is dead, or when the defect chain of its row has already run out
/// by the time the walk reaches it. The returned flags parallel
/// [`SCParameters::gammas_flat`].
pub fn sc_defined_mask(p: &SCParameters, tol: &Tolerances) -> Vec<bool> {
    let n = p.n();
    let mut mask = vec![false; n * n.saturating_sub(1) / 2];
    let max_d = p.diag().iter().cloned().fold(0.0f64, f64::max);
    let floor_d = tol.psd_eig_tol * max_d;
    for i in 0..n.saturating_sub(1) {
        if p.diag()[i] <= floor_d {
            continue;
        }
        let mut chain = 1.0f64;
        for j in i + 1..n {
            if p.diag()[j] <= floor_d {
                continue;
            }
            if chain <= tol.chain_floor() {
                break;
            }
            mask[p.flat_index(i, j)] = true;
            chain *= (1.0 - p.gamma(i, j).norm_sqr()).max(0.0).sqrt();
        }
    }
    mask
}
