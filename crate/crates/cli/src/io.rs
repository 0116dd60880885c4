//! JSON schemas and serialization plumbing for the command line tool.
//!
//! Complex entries are always `[re, im]` pairs, never strings. Every float
//! is printed in scientific notation with 17 significant digits, so piping
//! a command's output back into another command reproduces the exact bits.

use posparam_core::jacobi::{HankelMoments, JacobiParameters};
use posparam_core::qstate::{
    BipartiteState, DensityMatrix, KrausSet, QubitJacobiCoords, SeparabilityVerdict,
};
use posparam_core::sc::SCParameters;
use posparam_core::separable::{BatteryReport, ChecklistDetail};
use posparam_core::{Complex64, ComplexMatrix, Tolerances};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Failure modes of the command line layer, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or malformed input: exit 2.
    Usage(String),
    /// The math rejected the input (non-PSD, residuals, ...): exit 1.
    Domain(String),
}

impl From<posparam_core::Error> for CliError {
    fn from(e: posparam_core::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Compact JSON with floats rendered as `{:.16e}` (17 significant digits).
struct Sci17;

impl serde_json::ser::Formatter for Sci17 {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Renders a value as a single JSON line.
pub fn to_json_line<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sci17);
    value
        .serialize(&mut ser)
        .expect("in-memory serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serialized JSON is UTF-8")
}

/// First parse stage: syntax only, with a line/column diagnostic.
pub fn parse_value(text: &str) -> Result<serde_json::Value, CliError> {
    serde_json::from_str(text).map_err(|e| usage(format!("malformed JSON: {e}")))
}

/// Second parse stage: shape of a specific schema.
pub fn from_value<T: DeserializeOwned>(value: serde_json::Value) -> Result<T, CliError> {
    serde_json::from_value(value).map_err(|e| usage(format!("malformed input: {e}")))
}

/// Both stages in one step.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    from_value(parse_value(text)?)
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn finite_pair(p: [f64; 2], what: &str) -> Result<Complex64, CliError> {
    if !p[0].is_finite() || !p[1].is_finite() {
        return Err(usage(format!("{what} contains a non-finite entry")));
    }
    Ok(Complex64::new(p[0], p[1]))
}

/// Dense complex matrix: row-major nested `[re, im]` pairs.
#[derive(Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        MatrixFile {
            rows: m.rows(),
            cols: m.cols(),
            data: (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| pair(m.get(i, j))).collect())
                .collect(),
        }
    }

    pub fn into_matrix(self) -> Result<ComplexMatrix, CliError> {
        if self.data.len() != self.rows {
            return Err(usage(format!(
                "matrix file declares {} rows but data holds {}",
                self.rows,
                self.data.len()
            )));
        }
        let mut flat = Vec::with_capacity(self.rows.saturating_mul(self.cols));
        for (i, row) in self.data.into_iter().enumerate() {
            if row.len() != self.cols {
                return Err(usage(format!(
                    "matrix file row {i} holds {} entries, expected {}",
                    row.len(),
                    self.cols
                )));
            }
            for p in row {
                flat.push(finite_pair(p, "matrix file")?);
            }
        }
        ComplexMatrix::new(self.rows, self.cols, flat).map_err(|e| usage(e.to_string()))
    }
}

/// One complex table entry at an index pair.
#[derive(Serialize, Deserialize)]
pub struct ComplexEntry {
    pub i: usize,
    pub j: usize,
    pub re: f64,
    pub im: f64,
}

/// Contraction parameters: diagonal plus the full upper table with one-based
/// index pairs `i < j`.
#[derive(Serialize, Deserialize)]
pub struct ScParamsFile {
    pub n: usize,
    pub diag: Vec<f64>,
    pub gammas: Vec<ComplexEntry>,
}

impl ScParamsFile {
    pub fn from_params(p: &SCParameters) -> Self {
        let n = p.n();
        let mut gammas = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                let g = p.gamma(i, j);
                gammas.push(ComplexEntry { i: i + 1, j: j + 1, re: g.re, im: g.im });
            }
        }
        ScParamsFile { n, diag: p.diag().to_vec(), gammas }
    }

    pub fn into_params(self) -> Result<SCParameters, CliError> {
        let n = self.n;
        if self.diag.len() != n {
            return Err(usage(format!(
                "parameter file declares n={n} but diag holds {} values",
                self.diag.len()
            )));
        }
        let mut flat = vec![Complex64::new(0.0, 0.0); n * n.saturating_sub(1) / 2];
        let mut seen = vec![false; flat.len()];
        for e in &self.gammas {
            if e.i == 0 || e.i >= e.j || e.j > n {
                return Err(usage(format!(
                    "gamma index ({}, {}) is not a one-based pair i < j <= {n}",
                    e.i, e.j
                )));
            }
            let (i0, j0) = (e.i - 1, e.j - 1);
            let idx = i0 * (2 * n - i0 - 1) / 2 + (j0 - i0 - 1);
            if seen[idx] {
                return Err(usage(format!("gamma index ({}, {}) appears twice", e.i, e.j)));
            }
            seen[idx] = true;
            flat[idx] = finite_pair([e.re, e.im], "gamma table")?;
        }
        Ok(SCParameters::new(self.diag, flat)?)
    }
}

/// Near-tridiagonal parameters with zero-based correction indices
/// `0 <= i < j <= n-1`.
#[derive(Serialize, Deserialize)]
pub struct JacobiParamsFile {
    pub n: usize,
    pub s0: f64,
    pub a: Vec<f64>,
    pub b: Vec<[f64; 2]>,
    pub c: Vec<ComplexEntry>,
}

impl JacobiParamsFile {
    pub fn from_params(p: &JacobiParameters) -> Self {
        let n = p.n();
        let mut c = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                let v = p.c(i, j);
                c.push(ComplexEntry { i, j, re: v.re, im: v.im });
            }
        }
        JacobiParamsFile {
            n,
            s0: p.s0(),
            a: p.a().to_vec(),
            b: p.b().iter().map(|z| pair(*z)).collect(),
            c,
        }
    }

    pub fn into_params(self) -> Result<JacobiParameters, CliError> {
        let n = self.n;
        if self.a.len() != n || self.b.len() != n {
            return Err(usage(format!(
                "parameter file declares n={n} but a holds {} and b holds {} values",
                self.a.len(),
                self.b.len()
            )));
        }
        let mut flat = vec![Complex64::new(0.0, 0.0); n * n.saturating_sub(1) / 2];
        let mut seen = vec![false; flat.len()];
        for e in &self.c {
            if e.i >= e.j || e.j >= n {
                return Err(usage(format!(
                    "correction index ({}, {}) is not a zero-based pair i < j <= {}",
                    e.i,
                    e.j,
                    n.saturating_sub(1)
                )));
            }
            let idx = e.i * (2 * n - e.i - 1) / 2 + (e.j - e.i - 1);
            if seen[idx] {
                return Err(usage(format!(
                    "correction index ({}, {}) appears twice",
                    e.i, e.j
                )));
            }
            seen[idx] = true;
            flat[idx] = finite_pair([e.re, e.im], "correction table")?;
        }
        let b = self
            .b
            .into_iter()
            .map(|p| finite_pair(p, "diagonal values"))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(JacobiParameters::new(self.s0, self.a, b, flat)?)
    }
}

/// Bipartite state: a matrix file with the tensor split attached.
#[derive(Serialize)]
pub struct StateFile {
    pub dim_a: usize,
    pub dim_b: usize,
    #[serde(flatten)]
    pub matrix: MatrixFile,
}

impl StateFile {
    pub fn from_state(s: &BipartiteState) -> Self {
        StateFile {
            dim_a: s.dim_a(),
            dim_b: s.dim_b(),
            matrix: MatrixFile::from_matrix(s.rho().mat()),
        }
    }
}

/// Input-side state: the split may come from the file or from a flag.
#[derive(Deserialize)]
pub struct LooseStateFile {
    pub dim_a: Option<usize>,
    pub dim_b: Option<usize>,
    #[serde(flatten)]
    pub matrix: MatrixFile,
}

impl LooseStateFile {
    pub fn into_state(
        self,
        dims: Option<(usize, usize)>,
        tol: &Tolerances,
    ) -> Result<BipartiteState, CliError> {
        let (da, db) = match (dims, self.dim_a, self.dim_b) {
            (Some(d), _, _) => d,
            (None, Some(a), Some(b)) => (a, b),
            _ => {
                return Err(usage(
                    "state dimensions required: embed dim_a/dim_b or pass --dims M,N",
                ))
            }
        };
        let rho = DensityMatrix::new(self.matrix.into_matrix()?, tol)?;
        Ok(BipartiteState::new(da, db, rho)?)
    }
}

/// List of states for the battery subcommand.
#[derive(Deserialize)]
pub struct StatesFile {
    pub states: Vec<LooseStateFile>,
}

/// Qubit chart coordinates.
#[derive(Serialize, Deserialize)]
pub struct CoordsFile {
    pub s0: f64,
    pub a1: f64,
    pub b0: [f64; 2],
}

impl CoordsFile {
    pub fn from_coords(q: &QubitJacobiCoords) -> Self {
        CoordsFile { s0: q.s0(), a1: q.a1(), b0: pair(q.b0()) }
    }

    pub fn into_coords(self, tol: &Tolerances) -> Result<QubitJacobiCoords, CliError> {
        let b0 = finite_pair(self.b0, "coordinates")?;
        Ok(QubitJacobiCoords::new(self.s0, self.a1, b0, tol)?)
    }
}

/// A finite moment list `s_0..s_m`.
#[derive(Serialize, Deserialize)]
pub struct MomentsFile {
    pub s: Vec<[f64; 2]>,
}

impl MomentsFile {
    pub fn from_moments(h: &HankelMoments) -> Self {
        MomentsFile { s: h.moments().iter().map(|z| pair(*z)).collect() }
    }

    pub fn into_moments(self) -> Result<HankelMoments, CliError> {
        let s = self
            .s
            .into_iter()
            .map(|p| finite_pair(p, "moment list"))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(HankelMoments::new(s)?)
    }
}

/// A symmetric tridiagonal generator with its leading scale.
#[derive(Serialize, Deserialize)]
pub struct TridiagonalFile {
    pub s0: f64,
    pub j: MatrixFile,
}

/// Kraus operators of a bipartite state.
#[derive(Serialize)]
pub struct KrausFile {
    pub dim_a: usize,
    pub dim_b: usize,
    pub ops: Vec<MatrixFile>,
}

impl KrausFile {
    pub fn from_kraus(k: &KrausSet) -> Self {
        KrausFile {
            dim_a: k.dim_a(),
            dim_b: k.dim_b(),
            ops: k.ops().iter().map(MatrixFile::from_matrix).collect(),
        }
    }
}

/// One product term of a separability certificate.
#[derive(Serialize)]
pub struct CertTermFile {
    pub weight: f64,
    pub vec_a: Vec<[f64; 2]>,
    pub vec_b: Vec<[f64; 2]>,
}

/// Detector verdict, with the certificate when one is issued.
#[derive(Serialize)]
pub struct VerdictFile {
    pub verdict: String,
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Vec<CertTermFile>>,
}

impl VerdictFile {
    pub fn from_verdict(v: &SeparabilityVerdict) -> Self {
        let column = |m: &ComplexMatrix| (0..m.rows()).map(|i| pair(m.get(i, 0))).collect();
        VerdictFile {
            verdict: v.verdict.to_string(),
            reason: v.reason.clone(),
            certificate: v.certificate.as_ref().map(|terms| {
                terms
                    .iter()
                    .map(|t| CertTermFile {
                        weight: t.weight,
                        vec_a: column(&t.vec_a),
                        vec_b: column(&t.vec_b),
                    })
                    .collect()
            }),
        }
    }
}

/// Checklist outcome with the per-item breakdown.
#[derive(Serialize)]
pub struct ChecklistFile {
    pub passed: bool,
    pub items: Vec<ChecklistItemFile>,
}

#[derive(Serialize)]
pub struct ChecklistItemFile {
    pub name: String,
    pub passed: bool,
}

impl ChecklistFile {
    pub fn from_detail(passed: bool, detail: &ChecklistDetail) -> Self {
        ChecklistFile {
            passed,
            items: detail
                .as_pairs()
                .iter()
                .map(|(name, ok)| ChecklistItemFile { name: (*name).to_string(), passed: *ok })
                .collect(),
        }
    }
}

/// Battery report rows, mirroring the CSV columns.
#[derive(Serialize)]
pub struct BatteryFile {
    pub rows: Vec<BatteryRowFile>,
}

#[derive(Serialize)]
pub struct BatteryRowFile {
    pub state_id: usize,
    pub dim_a: usize,
    pub dim_b: usize,
    pub ppt: String,
    pub rank1: String,
    pub checklist: Option<String>,
    pub consistent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BatteryFile {
    pub fn from_report(report: &BatteryReport) -> Self {
        BatteryFile {
            rows: report
                .rows
                .iter()
                .map(|r| BatteryRowFile {
                    state_id: r.state_id,
                    dim_a: r.dim_a,
                    dim_b: r.dim_b,
                    ppt: r.ppt.to_string(),
                    rank1: r.rank1.to_string(),
                    checklist: r.checklist.map(|p| if p { "pass" } else { "fail" }.to_string()),
                    consistent: r.consistent,
                    note: r.note.clone(),
                })
                .collect(),
        }
    }
}
