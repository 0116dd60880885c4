//! Core PSD-cone operations: positivity checks, operator square roots,
//! semidefinite Cholesky factorization and numerical rank.
//!
//! Eigendecompositions, singular values and LU determinants are delegated to
//! nalgebra; everything else is implemented directly on [`ComplexMatrix`].
//! All thresholds come from a [`Tolerances`] bundle and are relative to the
//! input scale.

use crate::error::{Error, Result};
use crate::matrix::{Complex64, ComplexMatrix};
use crate::tolerance::Tolerances;

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
/// Columns of the returned matrix are the matching eigenvectors.
pub(crate) fn hermitian_eigen(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = a.rows();
    if n == 0 {
        return (Vec::new(), ComplexMatrix::zeros(0, 0));
    }
    let se = nalgebra::SymmetricEigen::new(a.to_na());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| se.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Singular value decomposition `A = U diag(s) V*`, singular values descending.
pub(crate) fn svd(a: &ComplexMatrix) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    let (r, c) = (a.rows(), a.cols());
    let k = r.min(c);
    if k == 0 {
        return (ComplexMatrix::zeros(r, 0), Vec::new(), ComplexMatrix::zeros(0, c));
    }
    let decomp = nalgebra::SVD::new(a.to_na(), true, true);
    let u = decomp.u.expect("u requested");
    let v_t = decomp.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| decomp.singular_values[j].partial_cmp(&decomp.singular_values[i]).unwrap());
    let sigma: Vec<f64> = order.iter().map(|&i| decomp.singular_values[i]).collect();
    let u_m = ComplexMatrix::from_fn(r, k, |i, j| u[(i, order[j])]);
    let vt_m = ComplexMatrix::from_fn(k, c, |i, j| v_t[(order[i], j)]);
    (u_m, sigma, vt_m)
}

/// Singular values only, descending.
pub(crate) fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let (_, s, _) = svd(a);
    s
}

/// Largest singular value; 0 for an empty matrix.
pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Moore-Penrose pseudoinverse with singular values below
/// `rank_tol * sigma_max` treated as zero.
pub(crate) fn pinv(a: &ComplexMatrix, tol: &Tolerances) -> ComplexMatrix {
    let (u, s, vt) = svd(a);
    let smax = s.first().copied().unwrap_or(0.0);
    let cutoff = tol.rank_tol * smax;
    let k = s.len();
    let mut core = ComplexMatrix::zeros(k, k);
    for i in 0..k {
        if s[i] > cutoff && s[i] > 0.0 {
            core.set(i, i, Complex64::new(1.0 / s[i], 0.0));
        }
    }
    // pinv = V diag(1/s) U*
    vt.adjoint().mul(&core).unwrap().mul(&u.adjoint()).unwrap()
}

/// LU determinant, used as an independent oracle for the parametrized
/// determinant formulas.
pub fn determinant_lu(a: &ComplexMatrix) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if a.rows() == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    Ok(a.to_na().lu().determinant())
}

/// Checks Hermitian symmetry and the eigenvalue floor.
///
/// Returns an error only for non-square input; asymmetric or indefinite
/// matrices simply yield `false`.
pub fn is_psd(a: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if a.rows() == 0 {
        return Ok(true);
    }
    let herm_floor = tol.psd_eig_tol * a.max_abs().max(1.0);
    if a.hermitian_defect() > herm_floor {
        return Ok(false);
    }
    let sym = a.hermitian_part()?;
    let (values, _) = hermitian_eigen(&sym);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(values[0] >= -tol.psd_eig_tol * scale.max(1.0))
}

/// Validates PSD-ness and returns the Hermitian part, which downstream
/// routines treat as the canonical input.
pub(crate) fn ensure_psd(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if a.rows() == 0 {
        return Ok(a.clone());
    }
    let herm_floor = tol.psd_eig_tol * a.max_abs().max(1.0);
    let defect = a.hermitian_defect();
    if defect > herm_floor {
        return Err(Error::NotHermitian { asymmetry: defect, floor: herm_floor });
    }
    let sym = a.hermitian_part()?;
    let (values, _) = hermitian_eigen(&sym);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = tol.psd_eig_tol * scale.max(1.0);
    if values[0] < -floor {
        return Err(Error::NotPsd { eigenvalue: values[0], floor });
    }
    Ok(sym)
}

/// Principal square root of a PSD matrix. Eigenvalues inside the tolerance
/// floor are clamped to zero before the root is taken.
pub fn principal_sqrt(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let sym = ensure_psd(a, tol)?;
    Ok(spectral_map(&sym, |lam| lam.max(0.0).sqrt()))
}

/// Square root of the pseudoinverse. Eigenvalues at or below
/// `rank_tol * lambda_max` map to zero instead of blowing up.
pub fn pinv_sqrt(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let sym = ensure_psd(a, tol)?;
    let (values, _) = hermitian_eigen(&sym);
    let lam_max = values.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = tol.rank_tol * lam_max;
    Ok(spectral_map(&sym, |lam| {
        if lam > cutoff && lam > 0.0 { 1.0 / lam.sqrt() } else { 0.0 }
    }))
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub(crate) fn spectral_map(sym: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let n = sym.rows();
    if n == 0 {
        return sym.clone();
    }
    let (values, vectors) = hermitian_eigen(sym);
    let mut core = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        core.set(i, i, Complex64::new(f(values[i]), 0.0));
    }
    let out = vectors.mul(&core).unwrap().mul(&vectors.adjoint()).unwrap();
    // the spectral form is Hermitian up to rounding; keep it exactly so
    out.hermitian_part().unwrap()
}

/// Upper-triangular factor `F` with nonnegative real diagonal and
/// `F* F = A`. A pivot that falls below the tolerance floor zeroes its whole
/// row, so rank-deficient inputs factor without pivot permutations.
pub fn semidefinite_cholesky(a: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let sym = ensure_psd(a, tol)?;
    let f = psd_factor_upper(&sym, tol);
    let residual = f.adjoint().mul(&f)?.sub(&sym)?.frobenius_norm();
    let bound = tol.recon_tol * sym.frobenius_norm();
    if residual > bound && residual > tol.recon_tol {
        return Err(Error::ResidualTooLarge { residual, tol: bound.max(tol.recon_tol) });
    }
    Ok(f)
}

/// The factorization core behind [`semidefinite_cholesky`], for callers that
/// already hold a Hermitian PSD matrix. Dead pivots zero their row instead of
/// failing, so this never errors; feeding it indefinite input just yields a
/// factor whose Gram differs from the input.
pub(crate) fn psd_factor_upper(sym: &ComplexMatrix, tol: &Tolerances) -> ComplexMatrix {
    let n = sym.rows();
    let mut f = ComplexMatrix::zeros(n, n);
    let max_diag = (0..n).map(|i| sym.get(i, i).re).fold(0.0f64, f64::max);
    let floor = tol.psd_eig_tol * max_diag;
    for k in 0..n {
        let mut pivot = sym.get(k, k).re;
        for m in 0..k {
            pivot -= f.get(m, k).norm_sqr();
        }
        if pivot <= floor {
            continue; // dead pivot: row k of F stays zero
        }
        let fkk = pivot.sqrt();
        f.set(k, k, Complex64::new(fkk, 0.0));
        for j in k + 1..n {
            let mut num = sym.get(k, j);
            for m in 0..k {
                num -= f.get(m, k).conj() * f.get(m, j);
            }
            f.set(k, j, num / fkk);
        }
    }
    f
}

/// Number of singular values above `rank_tol * sigma_max`; 0 for the zero
/// matrix.
pub fn numerical_rank(a: &ComplexMatrix, tol: &Tolerances) -> usize {
    let s = singular_values(a);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return 0;
    }
    let cutoff = tol.rank_tol * smax;
    s.iter().filter(|&&v| v > cutoff).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn indefinite_symmetric_matrix_is_not_psd() {
        // eigenvalues 3 and -1
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(!is_psd(&a, &tol()).unwrap());
    }

    #[test]
    fn gram_matrix_of_a_qubit_factor_is_psd() {
        // (s0, b0, a1) = (0.6, 0.8i, 0): Gram of an upper-triangular factor
        let a = ComplexMatrix::new(
            2,
            2,
            vec![c(0.36, 0.0), c(0.0, 0.48), c(0.0, -0.48), c(0.64, 0.0)],
        )
        .unwrap();
        assert!(is_psd(&a, &tol()).unwrap());
        assert_eq!(numerical_rank(&a, &tol()), 1);
    }

    #[test]
    fn non_square_input_is_a_dimension_error() {
        let a = ComplexMatrix::zeros(2, 3);
        assert!(matches!(is_psd(&a, &tol()), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn non_hermitian_square_input_is_rejected_by_ensure() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert!(!is_psd(&a, &tol()).unwrap());
        assert!(matches!(ensure_psd(&a, &tol()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn principal_sqrt_of_diagonal() {
        let a = ComplexMatrix::from_real_diagonal(&[4.0, 9.0]);
        let r = principal_sqrt(&a, &tol()).unwrap();
        assert!((r.get(0, 0).re - 2.0).abs() < 1e-12);
        assert!((r.get(1, 1).re - 3.0).abs() < 1e-12);
        assert!(r.get(0, 1).norm() < 1e-12);
    }

    #[test]
    fn principal_sqrt_squares_back_to_the_input() {
        let m = ComplexMatrix::new(
            3,
            2,
            vec![c(1.0, 0.2), c(0.5, -0.3), c(0.0, 1.0), c(2.0, 0.0), c(-1.0, 0.4), c(0.3, 0.3)],
        )
        .unwrap();
        let a = m.adjoint().mul(&m).unwrap();
        let r = principal_sqrt(&a, &tol()).unwrap();
        let back = r.mul(&r).unwrap();
        assert!(back.sub(&a).unwrap().frobenius_norm() < 1e-10 * a.frobenius_norm().max(1.0));
    }

    #[test]
    fn pinv_sqrt_inverts_on_the_range_only() {
        let a = ComplexMatrix::from_real_diagonal(&[4.0, 0.0]);
        let r = pinv_sqrt(&a, &tol()).unwrap();
        assert!((r.get(0, 0).re - 0.5).abs() < 1e-12);
        assert!(r.get(1, 1).norm() < 1e-12);
    }

    #[test]
    fn pinv_sqrt_projects_onto_the_range() {
        // sqrt(A) * pinv_sqrt(A) must be the orthogonal projector onto range(A)
        let m = ComplexMatrix::new(
            1,
            3,
            vec![c(1.0, 0.0), c(0.0, 1.0), c(1.0, -1.0)],
        )
        .unwrap();
        let a = m.adjoint().mul(&m).unwrap(); // rank 1
        let p = principal_sqrt(&a, &tol())
            .unwrap()
            .mul(&pinv_sqrt(&a, &tol()).unwrap())
            .unwrap();
        let p2 = p.mul(&p).unwrap();
        assert!(p2.sub(&p).unwrap().frobenius_norm() < 1e-10);
        let pa = p.mul(&a).unwrap();
        assert!(pa.sub(&a).unwrap().frobenius_norm() < 1e-10 * a.frobenius_norm());
        assert!((p.trace().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cholesky_of_a_rank_one_qubit_gram() {
        // (s0, b0, a1) = (1, 0.3, 0.4)
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 0.3, 0.3, 0.25]).unwrap();
        let f = semidefinite_cholesky(&a, &tol()).unwrap();
        assert!((f.get(0, 0).re - 1.0).abs() < 1e-12);
        assert!((f.get(0, 1).re - 0.3).abs() < 1e-12);
        assert!((f.get(1, 1).re - 0.4).abs() < 1e-12);
        assert!(f.get(1, 0).norm() == 0.0);
    }

    #[test]
    fn cholesky_zeroes_the_row_of_a_dead_pivot() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]).unwrap();
        let f = semidefinite_cholesky(&a, &tol()).unwrap();
        assert_eq!(f.get(1, 0).norm(), 0.0);
        assert_eq!(f.get(1, 1).norm(), 0.0);
        assert!((f.get(0, 0).re - 1.0).abs() < 1e-12);
        assert!((f.get(0, 1).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite_input() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(semidefinite_cholesky(&a, &tol()).is_err());
    }

    #[test]
    fn cholesky_residual_is_small_on_random_psd_input() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in 2..=8 {
            let a = crate::random::random_psd(n, n, &mut rng);
            let f = semidefinite_cholesky(&a, &tol()).unwrap();
            let res = f.adjoint().mul(&f).unwrap().sub(&a).unwrap().frobenius_norm();
            assert!(res <= 1e-10 * a.frobenius_norm().max(1.0), "residual {res} at n={n}");
            for i in 0..n {
                for j in 0..i {
                    assert_eq!(f.get(i, j).norm(), 0.0, "triangularity at ({i},{j})");
                }
                assert!(f.get(i, i).im == 0.0 && f.get(i, i).re >= 0.0);
            }
        }
    }

    #[test]
    fn rank_counts_gram_sums_exactly() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for k in 0..=5 {
            let a = crate::random::random_psd(6, k, &mut rng);
            assert_eq!(numerical_rank(&a, &tol()), k, "rank-{k} Gram sum");
        }
        assert_eq!(numerical_rank(&ComplexMatrix::zeros(4, 4), &tol()), 0);
    }

    #[test]
    fn lu_determinant_matches_hand_value() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        let d = determinant_lu(&a).unwrap();
        assert!((d.re + 3.0).abs() < 1e-12 && d.im.abs() < 1e-14);
    }

    #[test]
    fn tiny_scales_factor_without_absolute_floors() {
        let a = ComplexMatrix::from_real_diagonal(&[1e-12, 1e-12]);
        let f = semidefinite_cholesky(&a, &tol()).unwrap();
        assert!((f.get(0, 0).re - 1e-6).abs() < 1e-18);
        assert_eq!(numerical_rank(&a, &tol()), 2);
    }
}
