//! Near-tridiagonal models for PSD matrices and the Hankel moment problem.
//!
//! An `(n+1) x (n+1)` PSD matrix `A` is encoded by a scale `s0`, subdiagonal
//! weights `a_1..a_n`, diagonal values `b_0..b_{n-1}` and upper corrections
//! `c_{i,j}`: the matrices `J_1..J_n` built by [`build_jk`] generate factor
//! columns `s0*e0, J_1 e0, J_2 J_1 e0, ...` whose Gram matrix is `A`. When
//! all `c` vanish the single tridiagonal matrix `J_1` suffices, which is the
//! classical picture behind Hankel moment sequences; not every PSD matrix
//! admits that reduction, so the general model keeps the corrections.
//!
//! [`hankel_from_tridiagonal`] and [`tridiagonal_from_hankel`] convert
//! between a real symmetric tridiagonal matrix plus scale and the moment
//! sequence `s_k = s0 * <J^k e0, e0>`.

use crate::error::{Error, Result};
use crate::matcore;
use crate::matrix::{Complex64, ComplexMatrix};
use crate::tolerance::Tolerances;

/// Parameters of the near-tridiagonal model for an `(n+1) x (n+1)` matrix.
///
/// Indexing follows the generating recursion: `a` holds `a_1..a_n` (so
/// `a()[k-1]` is `a_k`), `b` holds `b_0..b_{n-1}` (the trailing diagonal
/// value `b_n` never reaches the factor columns and is not stored), and the
/// `c` table covers `c_{i,j}` for `0 <= i < j <= n-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiParameters {
    n: usize,
    s0: f64,
    a: Vec<f64>,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
}

impl JacobiParameters {
    /// Builds a parameter set; `a` and `b` must both have length `n` and the
    /// `c` table length `n(n-1)/2`, stored row-major:
    /// `(0,1), (0,2), ..., (1,2), ...`.
    pub fn new(s0: f64, a: Vec<f64>, b: Vec<Complex64>, c: Vec<Complex64>) -> Result<Self> {
        let n = a.len();
        if b.len() != n {
            return Err(Error::InvalidParameters(format!(
                "expected {n} diagonal values to match {n} subdiagonal weights, got {}",
                b.len()
            )));
        }
        let c_expected = n * n.saturating_sub(1) / 2;
        if c.len() != c_expected {
            return Err(Error::InvalidParameters(format!(
                "expected {c_expected} upper corrections for n={n}, got {}",
                c.len()
            )));
        }
        if !s0.is_finite() || a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if b.iter().chain(c.iter()).any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        if s0 < 0.0 {
            return Err(Error::InvalidParameters(format!("s0 must be nonnegative, got {s0}")));
        }
        if let Some(k) = a.iter().position(|v| *v < 0.0) {
            return Err(Error::InvalidParameters(format!(
                "subdiagonal weight a_{} must be nonnegative, got {}",
                k + 1,
                a[k]
            )));
        }
        Ok(JacobiParameters { n, s0, a, b, c })
    }

    /// The index `n`; the parametrized matrix is `(n+1) x (n+1)`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Size of the parametrized matrix, `n + 1`.
    pub fn size(&self) -> usize {
        self.n + 1
    }

    /// The scale attached to the first factor column.
    pub fn s0(&self) -> f64 {
        self.s0
    }

    /// Subdiagonal weights `a_1..a_n` (`a()[k-1]` is `a_k`).
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Diagonal values `b_0..b_{n-1}`.
    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    /// Upper correction at `(i, j)`, `0 <= i < j <= n-1`. Panics on a bad
    /// index pair.
    pub fn c(&self, i: usize, j: usize) -> Complex64 {
        self.c[self.c_index(i, j)]
    }

    /// The correction table as a flat row-major slice.
    pub fn c_flat(&self) -> &[Complex64] {
        &self.c
    }

    fn c_index(&self, i: usize, j: usize) -> usize {
        assert!(i < j && j < self.n, "correction index ({i},{j}) out of range for n={}", self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }
}

/// Builds the generator `J_k` (`1 <= k <= n`), an `(n+1) x (n+1)` matrix:
/// subdiagonal `a_1..a_n`, diagonal `b_0..b_{n-1}` (trailing entry zero),
/// and above the diagonal the correction `c_{i,j}` where `j <= k-1`, the
/// symmetric weight `a_j` on the superdiagonal beyond that, zero elsewhere.
///
/// `J_1` is symmetric tridiagonal; each step up in `k` converts one more
/// superdiagonal position into a correction column.
pub fn build_jk(p: &JacobiParameters, k: usize) -> Result<ComplexMatrix> {
    let n = p.n();
    if k == 0 || k > n {
        return Err(Error::InvalidParameters(format!(
            "generator index k={k} out of range 1..={n}"
        )));
    }
    let size = n + 1;
    let mut j_mat = ComplexMatrix::zeros(size, size);
    for i in 0..size {
        if i >= 1 {
            j_mat.set(i, i - 1, Complex64::new(p.a()[i - 1], 0.0));
        }
        if i < n {
            j_mat.set(i, i, p.b()[i]);
        }
        for col in i + 1..size {
            if col <= k - 1 {
                j_mat.set(i, col, p.c(i, col));
            } else if col == i + 1 {
                j_mat.set(i, col, Complex64::new(p.a()[col - 1], 0.0));
            }
        }
    }
    Ok(j_mat)
}

/// Columns of the factor: `s0*e0`, then `J_k ... J_1 e0` for `k = 1..n`.
fn factor_columns(p: &JacobiParameters) -> Vec<Vec<Complex64>> {
    let size = p.size();
    let mut cols = Vec::with_capacity(size);
    let mut col0 = vec![Complex64::new(0.0, 0.0); size];
    col0[0] = Complex64::new(p.s0(), 0.0);
    cols.push(col0);
    let mut v = vec![Complex64::new(0.0, 0.0); size];
    v[0] = Complex64::new(1.0, 0.0);
    for k in 1..size {
        let jk = build_jk(p, k).expect("k in range by construction");
        let mut next = vec![Complex64::new(0.0, 0.0); size];
        for (i, slot) in next.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, vt) in v.iter().enumerate() {
                acc += jk.get(i, t) * vt;
            }
            *slot = acc;
        }
        cols.push(next.clone());
        v = next;
    }
    cols
}

/// The upper-triangular factor `D` with columns `s0*e0, J_1 e0, J_2 J_1 e0,
/// ...`; its diagonal reads `s0, a_1, a_1 a_2, ..., a_1...a_n`.
pub fn jacobi_cholesky(p: &JacobiParameters) -> ComplexMatrix {
    let size = p.size();
    let cols = factor_columns(p);
    ComplexMatrix::from_fn(size, size, |i, j| cols[j][i])
}

/// The parametrized PSD matrix `D* D` where `D` is [`jacobi_cholesky`]; its
/// `(i, j)` entry is the inner product of factor columns `i` and `j`.
pub fn jacobi_reconstruct(p: &JacobiParameters) -> ComplexMatrix {
    let d = jacobi_cholesky(p);
    d.adjoint().mul(&d).expect("square factor")
}

/// Determinant of the parametrized matrix:
/// `s0^2 * prod_{k=1}^{n} (a_1...a_k)^2` (the squared factor diagonal).
pub fn jacobi_determinant(p: &JacobiParameters) -> f64 {
    let mut det = p.s0() * p.s0();
    let mut run = 1.0f64;
    for ak in p.a() {
        run *= ak;
        det *= run * run;
    }
    det
}

/// Extracts near-tridiagonal parameters from a PSD matrix, one factor column
/// at a time.
///
/// Column `m` solves the lower-triangular system `D* x = A[0..m, m]` by
/// forward substitution (the pivots are the real factor diagonal), then
/// reads the new parameters `c_{i,m-1}`, `b_{m-1}` and `a_m` off the affine
/// relations the column structure imposes. Dead pivots leave their unknowns
/// at zero; the final reconstruction residual decides whether the input
/// actually admits a model (some PSD matrices do not).
pub fn jacobi_extract(a: &ComplexMatrix, tol: &Tolerances) -> Result<JacobiParameters> {
    let sym = matcore::ensure_psd(a, tol)?;
    let size = sym.rows();
    if size == 0 {
        return JacobiParameters::new(0.0, Vec::new(), Vec::new(), Vec::new());
    }
    let n = size - 1;
    let max_d = (0..size).map(|i| sym.get(i, i).re).fold(0.0f64, f64::max);
    let pivot_floor = tol.rank_tol * max_d.max(0.0).sqrt();

    let s0 = sym.get(0, 0).re.max(0.0).sqrt();
    let mut a_out = vec![0.0f64; n];
    let mut b_out = vec![Complex64::new(0.0, 0.0); n];
    let mut c_out = vec![Complex64::new(0.0, 0.0); n * n.saturating_sub(1) / 2];
    let c_index = |i: usize, j: usize| i * (2 * n - i - 1) / 2 + (j - i - 1);

    // factor columns found so far; v is the current J-chain vector
    // (e0, then J_1 e0, then J_2 J_1 e0, ...)
    let mut d = ComplexMatrix::zeros(size, size);
    d.set(0, 0, Complex64::new(s0, 0.0));
    let mut v = vec![Complex64::new(0.0, 0.0); size];
    v[0] = Complex64::new(1.0, 0.0);

    for m in 1..size {
        // forward substitution on D*[0..m,0..m] x = A[0..m, m]
        let mut x = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            let mut acc = sym.get(i, m);
            for (t, xt) in x.iter().enumerate().take(i) {
                acc -= d.get(t, i).conj() * xt;
            }
            let pivot = d.get(i, i).re;
            x[i] = if pivot > pivot_floor { acc / pivot } else { Complex64::new(0.0, 0.0) };
        }
        // peel the new parameters out of x = J_m v
        let piv = v[m - 1].re; // = a_1...a_{m-1} (1 when m = 1)
        if piv > pivot_floor {
            for i in 0..m - 1 {
                let known = p_row_known(&a_out, &b_out, &c_out, &c_index, &v, i, m);
                c_out[c_index(i, m - 1)] = (x[i] - known) / piv;
            }
            let sub = if m >= 2 { v[m - 2] * a_out[m - 2] } else { Complex64::new(0.0, 0.0) };
            b_out[m - 1] = (x[m - 1] - sub) / piv;
            let norm_sq: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            a_out[m - 1] = (sym.get(m, m).re - norm_sq).max(0.0).sqrt() / piv;
        }
        // record column m of the factor and advance the chain vector
        let mut next = vec![Complex64::new(0.0, 0.0); size];
        next[..m].copy_from_slice(&x);
        next[m] = Complex64::new(a_out[m - 1] * piv, 0.0);
        for (i, val) in next.iter().enumerate() {
            d.set(i, m, *val);
        }
        v = next;
    }

    let params = JacobiParameters::new(s0, a_out, b_out, c_out)?;
    let residual = jacobi_reconstruct(&params).sub(&sym)?.frobenius_norm();
    let bound = tol.recon_tol * sym.frobenius_norm();
    if residual > bound {
        return Err(Error::ExtractionFailed { residual, tol: bound });
    }
    Ok(params)
}

/// Known part of row `i` of `J_m v` when solving for column `m`: everything
/// except the `c_{i,m-1}` term.
fn p_row_known(
    a: &[f64],
    b: &[Complex64],
    c: &[Complex64],
    c_index: &impl Fn(usize, usize) -> usize,
    v: &[Complex64],
    i: usize,
    m: usize,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    if i >= 1 {
        acc += v[i - 1] * a[i - 1];
    }
    acc += b[i] * v[i];
    for j in i + 1..m - 1 {
        acc += c[c_index(i, j)] * v[j];
    }
    acc
}

/// A finite moment sequence `s_0..s_{2r}` whose Hankel matrix
/// `H_{ij} = s_{i+j}` is PSD; the PSD check runs at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMoments {
    order: usize,
    s: Vec<Complex64>,
}

impl HankelMoments {
    /// Wraps a moment list. The list must have odd length `2r + 1` (so the
    /// Hankel matrix is square) and produce a PSD Hankel matrix, which in
    /// particular forces every moment to be real.
    pub fn new(s: Vec<Complex64>) -> Result<Self> {
        if s.len() % 2 == 0 || s.is_empty() {
            return Err(Error::InvalidParameters(format!(
                "moment list must have odd length 2r+1, got {}",
                s.len()
            )));
        }
        let order = (s.len() - 1) / 2;
        let h = ComplexMatrix::from_fn(order + 1, order + 1, |i, j| s[i + j]);
        matcore::ensure_psd(&h, &Tolerances::default())?;
        Ok(HankelMoments { order, s })
    }

    /// Convenience constructor from real moments.
    pub fn from_real(s: &[f64]) -> Result<Self> {
        Self::new(s.iter().map(|v| Complex64::new(*v, 0.0)).collect())
    }

    /// The order `r`; the list holds `2r + 1` moments.
    pub fn order(&self) -> usize {
        self.order
    }

    /// The moments `s_0..s_{2r}`.
    pub fn moments(&self) -> &[Complex64] {
        &self.s
    }

    /// The `(r+1) x (r+1)` Hankel matrix `H_{ij} = s_{i+j}`.
    pub fn hankel_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.order + 1, self.order + 1, |i, j| self.s[i + j])
    }
}

/// Moments `s_0 = s0` and `s_k = s0 * <J^k e0, e0>` without any validation.
fn moments_of(j: &ComplexMatrix, s0: f64, m: usize) -> Vec<Complex64> {
    let size = j.rows();
    let mut out = Vec::with_capacity(m + 1);
    out.push(Complex64::new(s0, 0.0));
    if size == 0 {
        out.resize(m + 1, Complex64::new(0.0, 0.0));
        return out;
    }
    let mut w = vec![Complex64::new(0.0, 0.0); size];
    w[0] = Complex64::new(1.0, 0.0);
    for _ in 1..=m {
        let mut next = vec![Complex64::new(0.0, 0.0); size];
        for (i, slot) in next.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, wt) in w.iter().enumerate() {
                acc += j.get(i, t) * wt;
            }
            *slot = acc;
        }
        out.push(next[0] * s0);
        w = next;
    }
    out
}

/// Checks that `j` is real, symmetric and tridiagonal within rounding.
fn check_real_symmetric_tridiagonal(j: &ComplexMatrix) -> Result<()> {
    if !j.is_square() {
        return Err(Error::NotSquare { rows: j.rows(), cols: j.cols() });
    }
    let floor = 1e-14 * j.max_abs().max(1.0);
    let size = j.rows();
    for r in 0..size {
        for c in 0..size {
            let z = j.get(r, c);
            if z.im.abs() > floor {
                return Err(Error::InvalidParameters(
                    "moment generation needs a real matrix".into(),
                ));
            }
            if r.abs_diff(c) > 1 && z.norm() > floor {
                return Err(Error::InvalidParameters(
                    "moment generation needs a tridiagonal matrix".into(),
                ));
            }
            if (z - j.get(c, r)).norm() > floor {
                return Err(Error::InvalidParameters(
                    "moment generation needs a symmetric matrix".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Moment sequence `s_0 = s0`, `s_k = s0 * <J^k e0, e0>` of a real symmetric
/// tridiagonal matrix, up to `s_m` (`m` even so the Hankel matrix closes).
///
/// The result always passes the PSD invariant: the moments are integrals
/// against the spectral measure of `(J, e0)`.
pub fn hankel_from_tridiagonal(j: &ComplexMatrix, s0: f64, m: usize) -> Result<HankelMoments> {
    check_real_symmetric_tridiagonal(j)?;
    if !(s0.is_finite() && s0 >= 0.0) {
        return Err(Error::InvalidParameters(format!("s0 must be nonnegative, got {s0}")));
    }
    if m % 2 != 0 {
        return Err(Error::InvalidParameters(format!(
            "moment count m={m} must be even so the list has odd length"
        )));
    }
    HankelMoments::new(moments_of(j, s0, m))
}

/// Recovers a real symmetric tridiagonal matrix and scale whose moments
/// reproduce the given sequence.
///
/// The bands come from the Cholesky factor `R` of the Hankel matrix
/// (successive orthogonalization of the moment sequence):
/// `a_k = R_kk / R_{k-1,k-1}` and `b_k = R_{k,k+1}/R_kk - R_{k-1,k}/R_{k-1,k-1}`.
/// A dead pivot truncates the matrix at that order; the reproduction check
/// then decides whether the truncated matrix still generates every input
/// moment (flat sequences do) or the sequence has no model at all.
pub fn tridiagonal_from_hankel(
    h: &HankelMoments,
    tol: &Tolerances,
) -> Result<(ComplexMatrix, f64)> {
    let n = h.order();
    let hm = h.hankel_matrix();
    let ftol = Tolerances { psd_eig_tol: tol.rank_tol, ..*tol };
    let f = matcore::psd_factor_upper(&hm, &ftol);
    let q = (0..=n).find(|&k| f.get(k, k).re == 0.0).unwrap_or(n + 1);
    let mut j = ComplexMatrix::zeros(q, q);
    for k in 0..q {
        let b_k = if k + 1 <= n {
            let mut val = f.get(k, k + 1).re / f.get(k, k).re;
            if k >= 1 {
                val -= f.get(k - 1, k).re / f.get(k - 1, k - 1).re;
            }
            val
        } else {
            0.0 // trailing diagonal value is invisible to the moments
        };
        j.set(k, k, Complex64::new(b_k, 0.0));
        if k >= 1 {
            let a_k = f.get(k, k).re / f.get(k - 1, k - 1).re;
            j.set(k, k - 1, Complex64::new(a_k, 0.0));
            j.set(k - 1, k, Complex64::new(a_k, 0.0));
        }
    }
    let s0 = h.moments()[0].re;
    let rec = moments_of(&j, s0, 2 * n);
    let scale = h.moments().iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    for (got, want) in rec.iter().zip(h.moments()) {
        if (got - want).norm() > tol.recon_tol * scale {
            return Err(Error::RankDeficient { order: q });
        }
    }
    Ok((j, s0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn sample_params() -> JacobiParameters {
        JacobiParameters::new(
            1.2,
            vec![0.7, 0.4, 0.9],
            vec![c(0.5, 0.2), c(-0.3, 0.6), c(0.1, -0.4)],
            vec![c(0.3, -0.1), c(-0.2, 0.5), c(0.6, 0.1)],
        )
        .unwrap()
    }

    #[test]
    fn parameter_construction_validates_lengths_and_signs() {
        assert!(JacobiParameters::new(1.0, vec![0.5], vec![], vec![]).is_err());
        assert!(JacobiParameters::new(-1.0, vec![], vec![], vec![]).is_err());
        assert!(JacobiParameters::new(1.0, vec![-0.5], vec![c(0.0, 0.0)], vec![]).is_err());
        let p = sample_params();
        assert_eq!(p.n(), 3);
        assert_eq!(p.size(), 4);
        assert_eq!(p.c(0, 2), c(-0.2, 0.5));
        assert_eq!(p.c(1, 2), c(0.6, 0.1));
    }

    #[test]
    fn first_generator_is_symmetric_tridiagonal() {
        let p = sample_params();
        let j1 = build_jk(&p, 1).unwrap();
        for i in 0..4usize {
            for j in 0..4usize {
                if i.abs_diff(j) > 1 {
                    assert_eq!(j1.get(i, j).norm(), 0.0);
                }
            }
        }
        assert_eq!(j1.get(0, 1), c(0.7, 0.0));
        assert_eq!(j1.get(1, 0), c(0.7, 0.0));
        assert_eq!(j1.get(0, 0), c(0.5, 0.2));
        assert_eq!(j1.get(3, 3).norm(), 0.0);
    }

    #[test]
    fn later_generators_swap_in_the_corrections() {
        let p = sample_params();
        let j2 = build_jk(&p, 2).unwrap();
        assert_eq!(j2.get(0, 1), p.c(0, 1));
        assert_eq!(j2.get(1, 2), c(0.4, 0.0));
        let j3 = build_jk(&p, 3).unwrap();
        assert_eq!(j3.get(0, 1), p.c(0, 1));
        assert_eq!(j3.get(0, 2), p.c(0, 2));
        assert_eq!(j3.get(1, 2), p.c(1, 2));
        assert_eq!(j3.get(2, 3), c(0.9, 0.0));
        assert_eq!(j3.get(0, 3).norm(), 0.0);
        assert!(build_jk(&p, 0).is_err());
        assert!(build_jk(&p, 4).is_err());
    }

    #[test]
    fn smallest_generator_has_a_zero_trailing_diagonal() {
        let p = JacobiParameters::new(1.0, vec![0.25], vec![c(0.75, 0.0)], vec![]).unwrap();
        let j1 = build_jk(&p, 1).unwrap();
        assert_eq!(j1.get(0, 0), c(0.75, 0.0));
        assert_eq!(j1.get(0, 1), c(0.25, 0.0));
        assert_eq!(j1.get(1, 0), c(0.25, 0.0));
        assert_eq!(j1.get(1, 1).norm(), 0.0);
    }

    #[test]
    fn two_by_two_reconstruction_matches_the_closed_form() {
        let s0 = 0.9;
        let b0 = c(0.5, 0.5);
        let a1 = 0.3;
        let p = JacobiParameters::new(s0, vec![a1], vec![b0], vec![]).unwrap();
        let a = jacobi_reconstruct(&p);
        assert!((a.get(0, 0).re - s0 * s0).abs() < 1e-14);
        assert!((a.get(0, 1) - b0 * s0).norm() < 1e-14);
        assert!((a.get(1, 0) - b0.conj() * s0).norm() < 1e-14);
        assert!((a.get(1, 1).re - (b0.norm_sqr() + a1 * a1)).abs() < 1e-14);
    }

    #[test]
    fn three_by_three_reconstruction_matches_the_printed_entries() {
        let s0 = 1.0;
        let b0 = c(0.5, 0.2);
        let b1 = c(-0.3, 0.6);
        let a1 = 0.7;
        let a2 = 0.4;
        let c01 = c(0.3, -0.1);
        let p = JacobiParameters::new(s0, vec![a1, a2], vec![b0, b1], vec![c01]).unwrap();
        let a = jacobi_reconstruct(&p);
        let top = b0 * b0 + c01 * a1;
        let mid = (b0 + b1) * a1;
        assert!((a.get(0, 2) - top * s0).norm() < 1e-13);
        assert!((a.get(1, 2) - (b0.conj() * top + mid * a1)).norm() < 1e-13);
        let want22 = top.norm_sqr() + mid.norm_sqr() + (a1 * a2) * (a1 * a2);
        assert!((a.get(2, 2).re - want22).abs() < 1e-13);
    }

    #[test]
    fn lone_scale_reconstructs_to_a_matrix_unit() {
        let p = JacobiParameters::new(
            1.0,
            vec![0.0, 0.0],
            vec![c(0.0, 0.0); 2],
            vec![c(0.0, 0.0)],
        )
        .unwrap();
        let a = jacobi_reconstruct(&p);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                assert!((a.get(i, j) - c(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn factor_is_upper_triangular_with_the_product_diagonal() {
        let p = sample_params();
        let d = jacobi_cholesky(&p);
        for i in 0..4 {
            for j in 0..i {
                assert_eq!(d.get(i, j).norm(), 0.0, "below diagonal at ({i},{j})");
            }
        }
        assert!((d.get(0, 0).re - 1.2).abs() < 1e-15);
        assert!((d.get(1, 1).re - 0.7).abs() < 1e-15);
        assert!((d.get(2, 2).re - 0.7 * 0.4).abs() < 1e-14);
        assert!((d.get(3, 3).re - 0.7 * 0.4 * 0.9).abs() < 1e-14);
        let gram = d.adjoint().mul(&d).unwrap();
        let direct = jacobi_reconstruct(&p);
        assert!(gram.sub(&direct).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn unit_parameters_factor_to_the_identity() {
        let p = JacobiParameters::new(
            1.0,
            vec![1.0, 1.0],
            vec![c(0.0, 0.0); 2],
            vec![c(0.0, 0.0)],
        )
        .unwrap();
        let d = jacobi_cholesky(&p);
        assert!(d.sub(&ComplexMatrix::identity(3)).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn determinant_is_the_squared_factor_diagonal_product() {
        let p = JacobiParameters::new(0.9, vec![0.3], vec![c(0.5, 0.5)], vec![]).unwrap();
        assert!((jacobi_determinant(&p) - 0.9 * 0.9 * 0.3 * 0.3).abs() < 1e-15);
        let dead = JacobiParameters::new(
            1.0,
            vec![0.5, 0.0],
            vec![c(0.2, 0.0); 2],
            vec![c(0.1, 0.0)],
        )
        .unwrap();
        assert_eq!(jacobi_determinant(&dead), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let shift = ComplexMatrix::from_real_diagonal(&[0.4; 4]);
            let a = crate::random::random_psd(4, 4, &mut rng).add(&shift).unwrap();
            let p = jacobi_extract(&a, &tol()).unwrap();
            let det = jacobi_determinant(&p);
            let lu = matcore::determinant_lu(&a).unwrap().re;
            assert!((det - lu).abs() <= 1e-8 * lu.abs().max(det.abs()));
        }
    }

    #[test]
    fn extraction_of_a_diagonal_matrix_is_trivial() {
        let p = jacobi_extract(&ComplexMatrix::identity(3), &tol()).unwrap();
        assert!((p.s0() - 1.0).abs() < 1e-15);
        assert!((p.a()[0] - 1.0).abs() < 1e-15);
        assert!((p.a()[1] - 1.0).abs() < 1e-15);
        assert!(p.b().iter().all(|z| z.norm() < 1e-15));
        assert!(p.c_flat().iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn extraction_recovers_the_two_by_two_parameters_exactly() {
        let b0 = c(0.5, 0.5);
        let a1 = 0.3;
        let a = ComplexMatrix::new(
            2,
            2,
            vec![c(1.0, 0.0), b0, b0.conj(), c(b0.norm_sqr() + a1 * a1, 0.0)],
        )
        .unwrap();
        let p = jacobi_extract(&a, &tol()).unwrap();
        assert!((p.s0() - 1.0).abs() < 1e-14);
        assert!((p.b()[0] - b0).norm() < 1e-14);
        assert!((p.a()[0] - a1).abs() < 1e-14);
    }

    #[test]
    fn round_trip_on_random_positive_definite_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..40 {
            let m = 2 + trial % 7;
            let shift = ComplexMatrix::from_real_diagonal(&vec![0.3; m]);
            let a = if trial % 2 == 0 {
                // real-entried instance
                let g = ComplexMatrix::from_fn(m, m, |_, _| {
                    c(rng.gen_range(-1.0..1.0), 0.0)
                });
                g.adjoint().mul(&g).unwrap().add(&shift).unwrap()
            } else {
                crate::random::random_psd(m, m, &mut rng).add(&shift).unwrap()
            };
            let p = jacobi_extract(&a, &tol()).unwrap();
            let back = jacobi_reconstruct(&p);
            let rel = back.sub(&a).unwrap().frobenius_norm() / a.frobenius_norm();
            assert!(rel <= 1e-8, "round trip failed at m={m}: rel={rel:.3e}");
        }
    }

    #[test]
    fn extraction_round_trips_its_own_parameters() {
        let p = sample_params();
        let a = jacobi_reconstruct(&p);
        let q = jacobi_extract(&a, &tol()).unwrap();
        assert!((p.s0() - q.s0()).abs() < 1e-10);
        for k in 0..3 {
            assert!((p.a()[k] - q.a()[k]).abs() < 1e-10);
            assert!((p.b()[k] - q.b()[k]).norm() < 1e-10);
        }
        for (x, y) in p.c_flat().iter().zip(q.c_flat()) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn matrices_without_a_model_are_rejected() {
        // A = diag(1, 0, 1): the zero middle diagonal kills a_1, so every
        // reachable factor column dies and A_22 = 1 can never be reproduced
        let a = ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 1.0]);
        match jacobi_extract(&a, &tol()) {
            Err(Error::ExtractionFailed { residual, .. }) => {
                assert!(residual > 0.9, "residual should be the lost unit entry");
            }
            other => panic!("expected extraction failure, got {other:?}"),
        }
    }

    #[test]
    fn some_positive_matrices_need_a_nonzero_correction() {
        // frozen instance: positive definite, yet no purely tridiagonal
        // model; the extracted correction c_{0,1} = 1/sqrt(2) is forced
        let a = ComplexMatrix::from_real(3, 3, &[2.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 2.0])
            .unwrap();
        let p = jacobi_extract(&a, &tol()).unwrap();
        assert!((p.c(0, 1).re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(p.c(0, 1).norm() > 1e-6);
        let back = jacobi_reconstruct(&p);
        assert!(back.sub(&a).unwrap().frobenius_norm() < 1e-12);
    }

    #[test]
    fn moments_of_simple_generators() {
        let zero = ComplexMatrix::zeros(2, 2);
        let h = hankel_from_tridiagonal(&zero, 1.0, 4).unwrap();
        assert_eq!(h.moments()[0], c(1.0, 0.0));
        assert!(h.moments()[1..].iter().all(|z| z.norm() == 0.0));

        let e00 = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let h = hankel_from_tridiagonal(&e00, 1.0, 6).unwrap();
        assert!(h.moments().iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-15));

        let flip = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let h = hankel_from_tridiagonal(&flip, 1.0, 4).unwrap();
        let want = [1.0, 0.0, 1.0, 0.0, 1.0];
        for (z, w) in h.moments().iter().zip(want) {
            assert!((z - c(w, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn moment_generation_validates_its_input() {
        let skew = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, -1.0, 0.0]).unwrap();
        assert!(hankel_from_tridiagonal(&skew, 1.0, 2).is_err());
        let wide = ComplexMatrix::from_real(3, 3, &[1.0, 0.0, 0.5, 0.0, 1.0, 0.0, 0.5, 0.0, 1.0])
            .unwrap();
        assert!(hankel_from_tridiagonal(&wide, 1.0, 2).is_err());
        let fine = ComplexMatrix::zeros(2, 2);
        assert!(hankel_from_tridiagonal(&fine, 1.0, 3).is_err()); // odd m
        assert!(hankel_from_tridiagonal(&fine, -1.0, 2).is_err());
    }

    #[test]
    fn moment_lists_are_validated_on_construction() {
        assert!(HankelMoments::from_real(&[1.0, 0.0]).is_err()); // even length
        assert!(HankelMoments::from_real(&[1.0, 0.0, -1.0]).is_err()); // indefinite
        let ok = HankelMoments::from_real(&[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(ok.order(), 1);
        assert_eq!(ok.hankel_matrix().get(0, 1).norm(), 0.0);
    }

    #[test]
    fn alternating_moments_recover_the_flip_generator() {
        let h = HankelMoments::from_real(&[1.0, 0.0, 1.0, 0.0, 1.0]).unwrap();
        let (j, s0) = tridiagonal_from_hankel(&h, &tol()).unwrap();
        assert_eq!(j.rows(), 2);
        assert!((s0 - 1.0).abs() < 1e-15);
        assert!(j.get(0, 0).norm() < 1e-12);
        assert!(j.get(1, 1).norm() < 1e-12);
        assert!((j.get(0, 1).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_prefix_recovers_a_zero_block() {
        let h = HankelMoments::from_real(&[1.0, 0.0, 0.0]).unwrap();
        let (j, s0) = tridiagonal_from_hankel(&h, &tol()).unwrap();
        assert_eq!(j.rows(), 1);
        assert_eq!(j.get(0, 0).norm(), 0.0);
        assert!((s0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unmodelable_moment_lists_report_the_breaking_order() {
        // PSD Hankel, but any measure with zero second moment is a point
        // mass at the origin and cannot produce the fourth moment
        let h = HankelMoments::from_real(&[1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        match tridiagonal_from_hankel(&h, &tol()) {
            Err(Error::RankDeficient { order }) => assert_eq!(order, 1),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn hankel_round_trip_on_random_tridiagonal_generators() {
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        for trial in 0..30 {
            let q = 2 + trial % 4;
            // the trailing diagonal entry never reaches the moments, so the
            // recoverable representative has it pinned at zero
            let mut j = ComplexMatrix::zeros(q, q);
            for i in 0..q {
                if i + 1 < q {
                    let a: f64 = rng.gen_range(0.2..1.0);
                    j.set(i, i + 1, c(a, 0.0));
                    j.set(i + 1, i, c(a, 0.0));
                    j.set(i, i, c(rng.gen_range(-0.8..0.8), 0.0));
                }
            }
            let m = 2 * (q - 1);
            let h = hankel_from_tridiagonal(&j, 1.5, m).unwrap();
            let (j2, s0) = tridiagonal_from_hankel(&h, &tol()).unwrap();
            assert!((s0 - 1.5).abs() < 1e-12);
            assert_eq!(j2.rows(), q, "trial {trial}");
            assert!(j2.sub(&j).unwrap().frobenius_norm() < 1e-8, "trial {trial}");
            let h2 = hankel_from_tridiagonal(&j2, s0, m).unwrap();
            for (x, y) in h.moments().iter().zip(h2.moments()) {
                assert!((x - y).norm() < 1e-8);
            }
        }
    }
}
