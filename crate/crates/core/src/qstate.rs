//! Quantum-state layer: density matrices, bipartite block structure, the
//! partial transpose test, Kraus operators obtained from factor rows, and the
//! three-parameter picture of qubit states.
//!
//! A bipartite state on `C^m ⊗ C^n` is stored as an `mn x mn` density matrix
//! whose outer block grid is indexed by the A system: block `(i, j)` is the
//! `n x n` operator on the B system obtained by pairing A-basis vectors `i`
//! and `j`. Kraus operators come from rows of the upper-triangular factor of
//! the state, reshaped row-major to `m x n`, so that
//! `rho = sum_k vec(K_k) vec(K_k)*` with `vec` stacking rows.

use crate::error::{Error, Result};
use crate::matcore;
use crate::matrix::{Complex64, ComplexMatrix};
use crate::sc;
use crate::tolerance::Tolerances;

/// Outcome of a separability test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// The state is certified separable.
    Separable,
    /// The state is certified entangled.
    Entangled,
    /// The test could not decide either way.
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Separable => "SEPARABLE",
            Verdict::Entangled => "ENTANGLED",
            Verdict::Inconclusive => "INCONCLUSIVE",
        };
        f.write_str(s)
    }
}

/// One term of a product decomposition: `weight * (a a*) ⊗ (b b*)` with unit
/// vectors `a` (dimension m) and `b` (dimension n).
#[derive(Clone, Debug)]
pub struct CertificateTerm {
    /// Nonnegative convex weight.
    pub weight: f64,
    /// Unit vector on the A system, stored as an `m x 1` column.
    pub vec_a: ComplexMatrix,
    /// Unit vector on the B system, stored as an `n x 1` column.
    pub vec_b: ComplexMatrix,
}

impl CertificateTerm {
    /// The weighted product state `weight * (a a*) ⊗ (b b*)`.
    pub fn product_state(&self) -> ComplexMatrix {
        let pa = self.vec_a.mul(&self.vec_a.adjoint()).expect("column times row");
        let pb = self.vec_b.mul(&self.vec_b.adjoint()).expect("column times row");
        pa.kron(&pb).scale_real(self.weight)
    }
}

/// Result of a separability test, optionally with an explicit product
/// decomposition backing a SEPARABLE verdict.
#[derive(Clone, Debug)]
pub struct SeparabilityVerdict {
    pub verdict: Verdict,
    pub certificate: Option<Vec<CertificateTerm>>,
    pub reason: String,
}

impl SeparabilityVerdict {
    /// Sum of the certificate terms, if a certificate is present.
    pub fn certificate_sum(&self) -> Option<ComplexMatrix> {
        let terms = self.certificate.as_ref()?;
        let mut acc: Option<ComplexMatrix> = None;
        for t in terms {
            let p = t.product_state();
            acc = Some(match acc {
                None => p,
                Some(s) => s.add(&p).expect("uniform certificate dimensions"),
            });
        }
        acc
    }
}

/// A trace-one positive matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    dim: usize,
    mat: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates positivity and unit trace (within `recon_tol`).
    pub fn new(mat: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare { rows: mat.rows(), cols: mat.cols() });
        }
        if !matcore::is_psd(&mat, tol)? {
            return Err(Error::InvalidDensity(
                "matrix is not positive semidefinite".into(),
            ));
        }
        let tr = mat.trace();
        let off = (tr - Complex64::new(1.0, 0.0)).norm();
        if off > tol.recon_tol {
            return Err(Error::InvalidDensity(format!(
                "trace differs from one by {off:.3e}"
            )));
        }
        Ok(Self { dim: mat.rows(), mat })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }
}

/// A density matrix on `C^m ⊗ C^n` with the A system indexing the outer
/// block grid.
#[derive(Clone, Debug)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    rho: DensityMatrix,
}

impl BipartiteState {
    pub fn new(dim_a: usize, dim_b: usize, rho: DensityMatrix) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::dims("bipartite factors must both be nonempty"));
        }
        if dim_a * dim_b != rho.dim() {
            return Err(Error::dims(format!(
                "density dimension {} does not factor as {dim_a} x {dim_b}",
                rho.dim()
            )));
        }
        Ok(Self { dim_a, dim_b, rho })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    /// The `n x n` block pairing A-basis vectors `i` and `j`.
    pub fn block(&self, i: usize, j: usize) -> ComplexMatrix {
        let n = self.dim_b;
        self.rho.mat().submatrix(i * n, (i + 1) * n, j * n, (j + 1) * n)
    }
}

/// Kraus operators of the channel dual to a bipartite state; each operator is
/// `dim_a x dim_b` and the set reassembles the state via row-major `vec`.
#[derive(Clone, Debug)]
pub struct KrausSet {
    dim_a: usize,
    dim_b: usize,
    ops: Vec<ComplexMatrix>,
}

impl KrausSet {
    pub fn new(dim_a: usize, dim_b: usize, ops: Vec<ComplexMatrix>) -> Result<Self> {
        for op in &ops {
            if op.rows() != dim_a || op.cols() != dim_b {
                return Err(Error::dims(format!(
                    "Kraus operator is {} x {}, expected {dim_a} x {dim_b}",
                    op.rows(),
                    op.cols()
                )));
            }
        }
        Ok(Self { dim_a, dim_b, ops })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn ops(&self) -> &[ComplexMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// `sum_k vec(K_k) vec(K_k)*`, which should reproduce the source state.
    pub fn reassemble(&self) -> ComplexMatrix {
        let size = self.dim_a * self.dim_b;
        let mut acc = ComplexMatrix::zeros(size, size);
        for op in &self.ops {
            let v = vec_row_major(op);
            let outer = v.mul(&v.adjoint()).expect("column times row");
            acc = acc.add(&outer).expect("fixed size");
        }
        acc
    }
}

/// Stacks the rows of a matrix into a single column.
pub fn vec_row_major(k: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::column_vector(k.data())
}

/// Transposes every `n x n` block of the state in place; the result is
/// Hermitian with the same trace but need not be positive.
pub fn partial_transpose_b(s: &BipartiteState) -> ComplexMatrix {
    let n = s.dim_b();
    let size = s.dim_a() * n;
    let mat = s.rho().mat();
    ComplexMatrix::from_fn(size, size, |r, c| {
        let (ia, rb) = (r / n, r % n);
        let (ja, cb) = (c / n, c % n);
        mat.get(ia * n + cb, ja * n + rb)
    })
}

/// Peres test: ENTANGLED when the partial transpose has a negative
/// eigenvalue, SEPARABLE when it stays positive and the dimension pair is one
/// where positivity decides (`2x2`, `2x3`, `3x2`), INCONCLUSIVE otherwise.
pub fn ppt_verdict(s: &BipartiteState, tol: &Tolerances) -> SeparabilityVerdict {
    let pt = partial_transpose_b(s);
    let sym = pt.hermitian_part().expect("partial transpose is square");
    let (values, _) = matcore::hermitian_eigen(&sym);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let min = values.first().copied().unwrap_or(0.0);
    if min < -tol.psd_eig_tol * scale {
        return SeparabilityVerdict {
            verdict: Verdict::Entangled,
            certificate: None,
            reason: format!("partial transpose has eigenvalue {min:.6e}"),
        };
    }
    let decidable = matches!((s.dim_a(), s.dim_b()), (2, 2) | (2, 3) | (3, 2));
    if decidable {
        SeparabilityVerdict {
            verdict: Verdict::Separable,
            certificate: None,
            reason: "partial transpose is positive and the dimension pair is decidable".into(),
        }
    } else {
        SeparabilityVerdict {
            verdict: Verdict::Inconclusive,
            certificate: None,
            reason: "partial transpose is positive but positivity alone does not decide these dimensions".into(),
        }
    }
}

/// Kraus operators of the dual channel, one per nonzero row of the
/// upper-triangular factor of the state. Row `k` holds `vec(K_k)*`, so each
/// operator is the conjugated row reshaped row-major to `dim_a x dim_b`;
/// rows that the factorization zeroed out are dropped.
pub fn kraus_from_state(s: &BipartiteState, tol: &Tolerances) -> Result<KrausSet> {
    let params = sc::sc_extract(s.rho().mat(), tol)?;
    let factor = matcore::psd_factor_upper(&sc::sc_reconstruct(&params), tol);
    let (m, n) = (s.dim_a(), s.dim_b());
    let size = m * n;
    let zero = Complex64::new(0.0, 0.0);
    let mut ops = Vec::new();
    for k in 0..size {
        let row = factor.row(k);
        if row.iter().all(|z| *z == zero) {
            continue;
        }
        ops.push(ComplexMatrix::from_fn(m, n, |r, c| row[r * n + c].conj()));
    }
    KrausSet::new(m, n, ops)
}

/// The three numbers `(s0, a1, b0)` describing a qubit state: `s0` and `a1`
/// nonnegative, `s0^2 + a1^2 + |b0|^2 = 1`, with the convention that the
/// degenerate case `s0 = 0` pins `b0 = 1`.
#[derive(Clone, Copy, Debug)]
pub struct QubitJacobiCoords {
    s0: f64,
    a1: f64,
    b0: Complex64,
}

impl QubitJacobiCoords {
    pub fn new(s0: f64, a1: f64, b0: Complex64, tol: &Tolerances) -> Result<Self> {
        if !(s0.is_finite() && a1.is_finite() && b0.re.is_finite() && b0.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        if s0 < 0.0 || a1 < 0.0 {
            return Err(Error::InvalidParameters(
                "s0 and a1 must be nonnegative".into(),
            ));
        }
        let sum = s0 * s0 + a1 * a1 + b0.norm_sqr();
        if (sum - 1.0).abs() > tol.recon_tol {
            return Err(Error::InvalidParameters(format!(
                "coordinates violate s0^2 + a1^2 + |b0|^2 = 1 by {:.3e}",
                (sum - 1.0).abs()
            )));
        }
        if s0 == 0.0 && (b0 - Complex64::new(1.0, 0.0)).norm() > tol.recon_tol {
            return Err(Error::InvalidParameters(
                "the degenerate case s0 = 0 requires b0 = 1".into(),
            ));
        }
        Ok(Self { s0, a1, b0 })
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn b0(&self) -> Complex64 {
        self.b0
    }
}

/// Reads the coordinates off a qubit density matrix: `s0 = sqrt(rho_00)`,
/// `b0 = rho_01 / s0`, `a1 = sqrt(rho_11 - |b0|^2)`. A vanishing corner
/// `rho_00` collapses to the convention point `(0, 0, 1)`.
pub fn qubit_to_jacobi(rho: &DensityMatrix, tol: &Tolerances) -> Result<QubitJacobiCoords> {
    if rho.dim() != 2 {
        return Err(Error::dims(format!(
            "qubit coordinates need a 2 x 2 density matrix, got dimension {}",
            rho.dim()
        )));
    }
    let mat = rho.mat();
    let p00 = mat.get(0, 0).re;
    let p11 = mat.get(1, 1).re.max(0.0);
    if p00 <= tol.psd_eig_tol {
        return QubitJacobiCoords::new(0.0, 0.0, Complex64::new(1.0, 0.0), tol);
    }
    let s0 = p00.sqrt();
    let mut b0 = mat.get(0, 1) / s0;
    // a1^2 = det(rho) / rho_00. The determinant of a rank-one matrix is pure
    // cancellation, so anything below a few dozen ulps of the entry products
    // is noise and snaps to exactly zero; positivity then caps |b0| so the
    // two coordinates stay consistent.
    let det = p00 * p11 - mat.get(0, 1).norm_sqr();
    let mut a1_sq = (det / p00).max(0.0);
    if a1_sq < 32.0 * f64::EPSILON * p11 {
        a1_sq = 0.0;
        if b0.norm_sqr() > p11 && b0.norm() > 0.0 {
            b0 *= p11.sqrt() / b0.norm();
        }
    }
    QubitJacobiCoords::new(s0, a1_sq.sqrt(), b0, tol)
}

/// Assembles the qubit density matrix of a coordinate triple:
/// `[[s0^2, s0 b0], [s0 conj(b0), |b0|^2 + a1^2]]`.
pub fn jacobi_to_qubit(q: &QubitJacobiCoords, tol: &Tolerances) -> Result<DensityMatrix> {
    let s0 = q.s0();
    let b0 = q.b0();
    let mat = ComplexMatrix::new(
        2,
        2,
        vec![
            Complex64::new(s0 * s0, 0.0),
            b0 * s0,
            b0.conj() * s0,
            Complex64::new(b0.norm_sqr() + q.a1() * q.a1(), 0.0),
        ],
    )?;
    DensityMatrix::new(mat, tol)
}

/// A qubit state is pure exactly when its `a1` coordinate vanishes.
pub fn qubit_is_pure(q: &QubitJacobiCoords, tol: &Tolerances) -> bool {
    q.a1() <= tol.rank_tol
}
