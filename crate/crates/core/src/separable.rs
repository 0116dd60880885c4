//! Separable-state generators and detectors built on the contraction table.
//!
//! Two generator families produce bipartite states that are separable by
//! construction: patterned states, whose B-side blocks live in the span of a
//! two-set index partition (every positive map acts completely positively on
//! that span, so no entanglement witness can see these states), and moment
//! states, where a positive Hankel matrix read as an `m x 2` state factors
//! over its defining nodes. The detectors run the other direction: the
//! rank-one Kraus test certifies separability with an explicit product
//! decomposition whenever every factor row of the state reshapes to a
//! rank-one operator, and a seven-item parameter checklist gives a quick
//! sufficient screen for `3 x 3`-partite states.
//!
//! # Saturated contractions and the pattern family
//!
//! A pattern matrix is what the contraction table produces when the diagonal
//! splits into an `s^2`-class and a `t^2`-class and every contraction
//! saturates at one:
//!
//! ```
//! use posparam_core::{sc, separable, Complex64};
//!
//! let (s, t) = (0.8_f64, 0.5_f64);
//! let one = Complex64::new(1.0, 0.0);
//! let zero = Complex64::new(0.0, 0.0);
//! // diagonal classes s^2, t^2, s^2 with both reachable contractions at 1
//! let p = sc::SCParameters::new(vec![s * s, t * t, s * s], vec![one, zero, one]).unwrap();
//! let pattern = separable::pattern_matrix(
//!     &separable::PatternFamily::s2(),
//!     Complex64::new(s * s, 0.0),
//!     Complex64::new(t * t, 0.0),
//!     Complex64::new(s * t, 0.0),
//! );
//! let diff = sc::sc_reconstruct(&p).sub(&pattern).unwrap().frobenius_norm();
//! assert!(diff < 1e-12);
//! ```
//!
//! Keeping the two-class diagonal but loosening the contractions to values
//! `alpha`, `beta`, `gamma` below one produces corner entries that mix
//! `beta` with the defects of `alpha` and `gamma`. Whether such a state
//! remains separable turns into a system of inequalities in those three
//! values; no closed-form test is attempted here, and the detectors below
//! handle such states one by one instead.

use crate::error::{Error, Result};
use crate::matcore;
use crate::matrix::{Complex64, ComplexMatrix};
use crate::qstate::{
    kraus_from_state, ppt_verdict, BipartiteState, CertificateTerm, DensityMatrix,
    SeparabilityVerdict, Verdict,
};
use crate::random::random_unit_vector;
use crate::sc;
use crate::tolerance::Tolerances;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Preset or free-form choice of the two-set index partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternKind {
    /// Caller-supplied partition of `{0..n-1}`.
    General,
    /// `n = 3`, s-class `{0, 1}`, t-class `{2}`.
    S1,
    /// `n = 3`, s-class `{0, 2}`, t-class `{1}`.
    S2,
    /// `n = 3`, s-class `{0}`, t-class `{1, 2}`.
    S3,
    /// `n = 2`, the one-per-class split; blocks are plain 2x2 symmetric.
    SymmetricBlock,
    /// `n = 2` split used when a moment matrix is read as an `m x 2` state.
    Hankel,
}

impl std::fmt::Display for PatternKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PatternKind::General => "GENERAL",
            PatternKind::S1 => "S1",
            PatternKind::S2 => "S2",
            PatternKind::S3 => "S3",
            PatternKind::SymmetricBlock => "SYMMETRIC_BLOCK",
            PatternKind::Hankel => "HANKEL",
        };
        f.write_str(s)
    }
}

/// A two-set partition of `{0..n-1}` selecting the s-class and t-class
/// positions of a pattern.
#[derive(Clone, Debug)]
pub struct PatternFamily {
    kind: PatternKind,
    n: usize,
    i_s: Vec<usize>,
    i_t: Vec<usize>,
}

impl PatternFamily {
    /// Free-form family from explicit index classes. Both classes must be
    /// nonempty, disjoint and together cover `0..n-1`.
    pub fn general(n: usize, i_s: &[usize], i_t: &[usize]) -> Result<Self> {
        Self::build(PatternKind::General, n, i_s.to_vec(), i_t.to_vec())
    }

    pub fn s1() -> Self {
        Self::build(PatternKind::S1, 3, vec![0, 1], vec![2]).expect("fixed preset")
    }

    pub fn s2() -> Self {
        Self::build(PatternKind::S2, 3, vec![0, 2], vec![1]).expect("fixed preset")
    }

    pub fn s3() -> Self {
        Self::build(PatternKind::S3, 3, vec![0], vec![1, 2]).expect("fixed preset")
    }

    pub fn symmetric_block() -> Self {
        Self::build(PatternKind::SymmetricBlock, 2, vec![0], vec![1]).expect("fixed preset")
    }

    pub fn hankel_pair() -> Self {
        Self::build(PatternKind::Hankel, 2, vec![0], vec![1]).expect("fixed preset")
    }

    fn build(kind: PatternKind, n: usize, mut i_s: Vec<usize>, mut i_t: Vec<usize>) -> Result<Self> {
        if i_s.is_empty() || i_t.is_empty() {
            return Err(Error::InvalidParameters(
                "both pattern classes must be nonempty".into(),
            ));
        }
        i_s.sort_unstable();
        i_t.sort_unstable();
        let mut seen = vec![false; n];
        for &idx in i_s.iter().chain(i_t.iter()) {
            if idx >= n {
                return Err(Error::InvalidParameters(format!(
                    "pattern index {idx} is out of range for size {n}"
                )));
            }
            if seen[idx] {
                return Err(Error::InvalidParameters(format!(
                    "pattern index {idx} appears twice"
                )));
            }
            seen[idx] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidParameters(
                "pattern classes must cover every index".into(),
            ));
        }
        Ok(Self { kind, n, i_s, i_t })
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn i_s(&self) -> &[usize] {
        &self.i_s
    }

    pub fn i_t(&self) -> &[usize] {
        &self.i_t
    }

    fn s_flags(&self) -> Vec<bool> {
        let mut flags = vec![false; self.n];
        for &i in &self.i_s {
            flags[i] = true;
        }
        flags
    }
}

/// The pattern with value `a` on s-s positions, `b` on t-t positions, `c` on
/// s-t positions and `conj(c)` on t-s positions. Positivity is not checked;
/// the result is PSD exactly when `[[a, c], [conj(c), b]]` is.
pub fn pattern_matrix(
    f: &PatternFamily,
    a: Complex64,
    b: Complex64,
    c: Complex64,
) -> ComplexMatrix {
    let in_s = f.s_flags();
    ComplexMatrix::from_fn(f.n(), f.n(), |i, j| match (in_s[i], in_s[j]) {
        (true, true) => a,
        (false, false) => b,
        (true, false) => c,
        (false, true) => c.conj(),
    })
}

/// Draws a separable `k x n` state whose B-side blocks all follow the
/// pattern of the family: a convex combination of product terms
/// `(x x*) ⊗ (g g*)` where every `g` is a real mix of the two normalized
/// class indicators. Block symmetry makes the partial transpose a fixed
/// point, so these states stay positive under it at every `k`.
pub fn gen_pattern_state(f: &PatternFamily, k: usize, seed: u64) -> Result<BipartiteState> {
    if k == 0 {
        return Err(Error::InvalidParameters(
            "the A side must have at least one dimension".into(),
        ));
    }
    let n = f.n();
    let ns = (f.i_s().len() as f64).sqrt();
    let nt = (f.i_t().len() as f64).sqrt();
    let in_s = f.s_flags();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = k * n;
    let terms = 2 * k + 2;
    let max_attempts = 8;
    for _ in 0..max_attempts {
        let mut acc = ComplexMatrix::zeros(size, size);
        let mut trace = 0.0f64;
        for _ in 0..terms {
            let x = random_unit_vector(k, &mut rng);
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let weight = rng.gen_range(0.05..=1.0);
            let g = ComplexMatrix::from_fn(n, 1, |i, _| {
                let v = if in_s[i] { angle.cos() / ns } else { angle.sin() / nt };
                Complex64::new(v, 0.0)
            });
            let pa = x.mul(&x.adjoint()).expect("column times row");
            let pb = g.mul(&g.adjoint()).expect("column times row");
            acc = acc.add(&pa.kron(&pb).scale_real(weight)).expect("fixed size");
            trace += weight; // both factors are unit vectors
        }
        if trace <= f64::MIN_POSITIVE {
            continue;
        }
        let rho = DensityMatrix::new(acc.scale_real(1.0 / trace), &Tolerances::default())?;
        return BipartiteState::new(k, n, rho);
    }
    Err(Error::DegenerateDraw { attempts: max_attempts })
}

/// Builds the normalized moment state of explicit nodes and weights: the
/// `2m x 2m` matrix with entries `sum_l w_l t_l^(i+j)`, read as an `m x 2`
/// state. Entries depend only on `i + j`, so every A-side block is symmetric
/// and the state is separable by construction.
pub fn hankel_state_from_nodes(m: usize, weights: &[f64], nodes: &[f64]) -> Result<BipartiteState> {
    if m < 2 {
        return Err(Error::InvalidParameters(
            "moment states need m >= 2".into(),
        ));
    }
    if weights.is_empty() || weights.len() != nodes.len() {
        return Err(Error::dims(
            "weights and nodes must be nonempty lists of equal length",
        ));
    }
    for (&w, &t) in weights.iter().zip(nodes) {
        if !w.is_finite() || !t.is_finite() {
            return Err(Error::NonFinite);
        }
        if w < 0.0 {
            return Err(Error::InvalidParameters(format!(
                "weight {w} is negative"
            )));
        }
    }
    let size = 2 * m;
    let mut moments = vec![0.0f64; 2 * size - 1];
    for (&w, &t) in weights.iter().zip(nodes) {
        let mut p = 1.0f64;
        for slot in moments.iter_mut() {
            *slot += w * p;
            p *= t;
        }
    }
    let trace: f64 = (0..size).map(|i| moments[2 * i]).sum();
    if trace <= f64::MIN_POSITIVE {
        return Err(Error::InvalidParameters(
            "all weights vanish; the moment matrix is zero".into(),
        ));
    }
    let mat = ComplexMatrix::from_fn(size, size, |i, j| {
        Complex64::new(moments[i + j] / trace, 0.0)
    });
    let rho = DensityMatrix::new(mat, &Tolerances::default())?;
    BipartiteState::new(m, 2, rho)
}

/// Draws a random moment state: `points` nodes uniform in `[-1, 1]` with
/// weights in `(0, 1]`, passed through [`hankel_state_from_nodes`].
pub fn gen_hankel_state(m: usize, points: usize, seed: u64) -> Result<BipartiteState> {
    if points == 0 {
        return Err(Error::InvalidParameters(
            "at least one node is required".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::with_capacity(points);
    let mut nodes = Vec::with_capacity(points);
    for _ in 0..points {
        weights.push(1.0 - rng.gen::<f64>());
        nodes.push(rng.gen_range(-1.0..=1.0));
    }
    hankel_state_from_nodes(m, &weights, &nodes)
}

/// One-sided separability test through the factor rows: SEPARABLE with an
/// explicit product decomposition when every Kraus operator of the state has
/// numerical rank one, INCONCLUSIVE otherwise. A failed factorization is
/// also reported as INCONCLUSIVE rather than an error; the test never
/// declares entanglement, since a different factorization of the same state
/// could still be rank-one throughout.
pub fn rank1_kraus_test(s: &BipartiteState, tol: &Tolerances) -> SeparabilityVerdict {
    let kraus = match kraus_from_state(s, tol) {
        Ok(k) => k,
        Err(e) => {
            return SeparabilityVerdict {
                verdict: Verdict::Inconclusive,
                certificate: None,
                reason: format!("factorization failed: {e}"),
            }
        }
    };
    for op in kraus.ops() {
        let rank = matcore::numerical_rank(op, tol);
        if rank > 1 {
            return SeparabilityVerdict {
                verdict: Verdict::Inconclusive,
                certificate: None,
                reason: format!("Kraus rank {rank}"),
            };
        }
    }
    let mut certificate = Vec::with_capacity(kraus.len());
    for op in kraus.ops() {
        let (u, sigma, vt) = matcore::svd(op);
        let weight = sigma[0] * sigma[0];
        let vec_a = ComplexMatrix::from_fn(op.rows(), 1, |i, _| u.get(i, 0));
        // Row 0 of V* conjugated back gives the right singular vector v; the
        // product state needs conj(v), which is the raw row itself.
        let vec_b = ComplexMatrix::from_fn(op.cols(), 1, |j, _| vt.get(0, j));
        certificate.push(CertificateTerm { weight, vec_a, vec_b });
    }
    SeparabilityVerdict {
        verdict: Verdict::Separable,
        certificate: Some(certificate),
        reason: "all nonzero Kraus operators have rank 1".into(),
    }
}

/// Item-by-item outcome of [`checklist_3x3`]. Column and row numbers refer
/// to the one-based positions in the 9 x 9 contraction table and factor of
/// the state; an item quantifying over table entries skips positions the
/// extraction pinned (dead diagonal or exhausted chain) and holds vacuously
/// when none of its positions carry information.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChecklistDetail {
    /// Some determined entry in column 6, rows 1-5, saturates at modulus 1.
    pub sixth_column_has_unit: bool,
    /// Some determined entry in column 5, rows 1-4, saturates at modulus 1.
    pub fifth_column_has_unit: bool,
    /// If the only saturated entry of column 6 is in row 1, the entry at
    /// (1, 5) must vanish.
    pub sixth_column_witness_consistent: bool,
    /// The operator reshaped from factor row 4 has rank at most one.
    pub fourth_row_kraus_rank_one: bool,
    /// The entry at (2, 3) or at (1, 3) saturates at modulus 1.
    pub third_column_has_unit: bool,
    /// The entry at (1, 2) vanishes.
    pub leading_pair_vanishes: bool,
    /// The operator reshaped from factor row 1 has rank at most one.
    pub first_row_kraus_rank_one: bool,
}

impl ChecklistDetail {
    /// True when every item holds.
    pub fn all(&self) -> bool {
        self.sixth_column_has_unit
            && self.fifth_column_has_unit
            && self.sixth_column_witness_consistent
            && self.fourth_row_kraus_rank_one
            && self.third_column_has_unit
            && self.leading_pair_vanishes
            && self.first_row_kraus_rank_one
    }

    /// Stable name/value pairs for tabular output.
    pub fn as_pairs(&self) -> [(&'static str, bool); 7] {
        [
            ("sixth_column_has_unit", self.sixth_column_has_unit),
            ("fifth_column_has_unit", self.fifth_column_has_unit),
            (
                "sixth_column_witness_consistent",
                self.sixth_column_witness_consistent,
            ),
            ("fourth_row_kraus_rank_one", self.fourth_row_kraus_rank_one),
            ("third_column_has_unit", self.third_column_has_unit),
            ("leading_pair_vanishes", self.leading_pair_vanishes),
            ("first_row_kraus_rank_one", self.first_row_kraus_rank_one),
        ]
    }
}

/// Sufficient separability screen for `3 x 3`-partite states: extracts the
/// contraction table of the 9 x 9 state and evaluates seven saturation and
/// rank conditions which together force every Kraus operator of the state to
/// have rank one. Passing therefore implies [`rank1_kraus_test`] certifies
/// the state; failing decides nothing.
pub fn checklist_3x3(s: &BipartiteState, tol: &Tolerances) -> Result<(bool, ChecklistDetail)> {
    if s.dim_a() != 3 || s.dim_b() != 3 {
        return Err(Error::dims(format!(
            "the checklist needs a 3 x 3-partite state, got {} x {}",
            s.dim_a(),
            s.dim_b()
        )));
    }
    let p = sc::sc_extract(s.rho().mat(), tol)?;
    let mask = sc::sc_defined_mask(&p, tol);
    let factor = matcore::psd_factor_upper(&sc::sc_reconstruct(&p), tol);

    // One-based views of the table, matching the item descriptions.
    let defined = |i: usize, j: usize| mask[p.flat_index(i - 1, j - 1)];
    let saturated =
        |i: usize, j: usize| 1.0 - p.gamma(i - 1, j - 1).norm_sqr() <= tol.recon_tol;
    let vanishes = |i: usize, j: usize| p.gamma(i - 1, j - 1).norm() <= tol.recon_tol;

    let sweep = |pairs: &[(usize, usize)]| -> bool {
        let mut any_defined = false;
        let mut hit = false;
        for &(i, j) in pairs {
            if defined(i, j) {
                any_defined = true;
                if saturated(i, j) {
                    hit = true;
                }
            }
        }
        hit || !any_defined
    };

    let sixth_column_has_unit =
        sweep(&[(1, 6), (2, 6), (3, 6), (4, 6), (5, 6)]);
    let fifth_column_has_unit = sweep(&[(1, 5), (2, 5), (3, 5), (4, 5)]);

    let tail_unsaturated =
        (2..=5).all(|i| !defined(i, 6) || !saturated(i, 6));
    let first_is_witness = defined(1, 6) && saturated(1, 6);
    let sixth_column_witness_consistent = if tail_unsaturated && first_is_witness {
        !defined(1, 5) || vanishes(1, 5)
    } else {
        true
    };

    let third_column_has_unit = sweep(&[(2, 3), (1, 3)]);
    let leading_pair_vanishes = !defined(1, 2) || vanishes(1, 2);

    let kraus_row = |row: usize| -> ComplexMatrix {
        ComplexMatrix::from_fn(3, 3, |r, c| factor.get(row, 3 * r + c).conj())
    };
    let fourth_row_kraus_rank_one = matcore::numerical_rank(&kraus_row(3), tol) <= 1;
    let first_row_kraus_rank_one = matcore::numerical_rank(&kraus_row(0), tol) <= 1;

    let detail = ChecklistDetail {
        sixth_column_has_unit,
        fifth_column_has_unit,
        sixth_column_witness_consistent,
        fourth_row_kraus_rank_one,
        third_column_has_unit,
        leading_pair_vanishes,
        first_row_kraus_rank_one,
    };
    Ok((detail.all(), detail))
}

/// One state's results in a detector battery run.
#[derive(Clone, Debug)]
pub struct BatteryRow {
    pub state_id: usize,
    pub dim_a: usize,
    pub dim_b: usize,
    pub ppt: Verdict,
    pub rank1: Verdict,
    /// Checklist outcome for `3 x 3`-partite states, absent otherwise.
    pub checklist: Option<bool>,
    /// No state may be declared entangled by the transpose test yet
    /// certified separable, and a passed checklist must be backed by a
    /// rank-one certificate.
    pub consistent: bool,
    /// Per-state failure notes; failures are recorded, not thrown.
    pub note: Option<String>,
}

/// Tabular outcome of [`run_detector_battery`].
#[derive(Clone, Debug, Default)]
pub struct BatteryReport {
    pub rows: Vec<BatteryRow>,
}

impl BatteryReport {
    /// CSV rendering with columns
    /// `state_id,dims,ppt,rank1,checklist,consistent`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("state_id,dims,ppt,rank1,checklist,consistent\n");
        for row in &self.rows {
            let checklist = match row.checklist {
                Some(true) => "pass",
                Some(false) => "fail",
                None => "",
            };
            out.push_str(&format!(
                "{},{}x{},{},{},{},{}\n",
                row.state_id, row.dim_a, row.dim_b, row.ppt, row.rank1, checklist,
                row.consistent
            ));
        }
        out
    }
}

/// Runs every applicable detector on each state and cross-checks the
/// verdicts. Rows come back in input order; detector failures are recorded
/// in the row instead of aborting the run.
pub fn run_detector_battery(states: &[BipartiteState], tol: &Tolerances) -> BatteryReport {
    let mut rows = Vec::with_capacity(states.len());
    for (state_id, s) in states.iter().enumerate() {
        let ppt = ppt_verdict(s, tol);
        let rank1 = rank1_kraus_test(s, tol);
        let mut note = None;
        let checklist = if s.dim_a() == 3 && s.dim_b() == 3 {
            match checklist_3x3(s, tol) {
                Ok((passed, _)) => Some(passed),
                Err(e) => {
                    note = Some(format!("checklist failed: {e}"));
                    None
                }
            }
        } else {
            None
        };
        let consistent = !(ppt.verdict == Verdict::Entangled
            && rank1.verdict == Verdict::Separable)
            && !(checklist == Some(true) && rank1.verdict != Verdict::Separable);
        rows.push(BatteryRow {
            state_id,
            dim_a: s.dim_a(),
            dim_b: s.dim_b(),
            ppt: ppt.verdict,
            rank1: rank1.verdict,
            checklist,
            consistent,
            note,
        });
    }
    BatteryReport { rows }
}
