//! Command line front end for the parametrization library.
//!
//! Matrices, parameter sets and states travel as single-line JSON documents
//! (see `io`), read from `--in` (default stdin) and written to stdout, so
//! commands compose into pipes:
//!
//! ```text
//! posparam sep gen-hankel --m 2 --seed 7 | posparam state ppt --dims 2,2
//! ```
//!
//! Exit codes: 0 on success, 1 when the math rejects the input (not PSD,
//! residual too large, not a density matrix, ...), 2 for usage errors and
//! malformed input.

mod io;

use clap::{Args, Parser, Subcommand, ValueEnum};
use io::{usage, CliError};
use posparam_core::jacobi::{
    hankel_from_tridiagonal, jacobi_cholesky, jacobi_determinant, jacobi_extract,
    jacobi_reconstruct, tridiagonal_from_hankel, JacobiParameters,
};
use posparam_core::qstate::{
    jacobi_to_qubit, kraus_from_state, ppt_verdict, qubit_to_jacobi, DensityMatrix,
};
use posparam_core::sc::{
    sc_cholesky, sc_determinant, sc_extract, sc_is_rank_one, sc_reconstruct, SCParameters,
};
use posparam_core::separable::{
    checklist_3x3, gen_hankel_state, gen_pattern_state, pattern_matrix, rank1_kraus_test,
    run_detector_battery, PatternFamily,
};
use posparam_core::{Complex64, Tolerances};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "posparam",
    version,
    about = "Contraction and near-tridiagonal parametrizations of PSD matrices, \
             with quantum separability detectors"
)]
struct Cli {
    #[command(flatten)]
    globals: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Relative eigenvalue floor for positivity checks
    #[arg(long = "tol-psd", global = true, value_name = "REAL", env = "POSPARAM_TOL_PSD")]
    tol_psd: Option<f64>,

    /// Relative singular value cutoff for rank decisions
    #[arg(long = "tol-rank", global = true, value_name = "REAL", env = "POSPARAM_TOL_RANK")]
    tol_rank: Option<f64>,

    /// Relative Frobenius tolerance for reconstructions and residuals
    #[arg(long = "tol-recon", global = true, value_name = "REAL", env = "POSPARAM_TOL_RECON")]
    tol_recon: Option<f64>,

    /// Seed for the generator subcommands
    #[arg(long, global = true, value_name = "INT", default_value_t = 0)]
    seed: u64,

    /// Output format; csv applies to battery reports only
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Json)]
    out: OutFormat,

    /// Input path, '-' for stdin
    #[arg(long = "in", global = true, value_name = "PATH", default_value = "-")]
    input: String,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Contraction-table parametrization of PSD matrices
    #[command(subcommand)]
    Sc(ScCmd),
    /// Near-tridiagonal parametrization and moment sequences
    #[command(subcommand)]
    Jacobi(JacobiCmd),
    /// Density matrices: partial transpose, Kraus operators, qubit chart
    #[command(subcommand)]
    State(StateCmd),
    /// Separable-state generators and detectors
    #[command(subcommand)]
    Sep(SepCmd),
}

#[derive(Subcommand)]
enum ScCmd {
    /// Matrix in, contraction parameters out
    Extract,
    /// Contraction parameters in, matrix out
    Reconstruct,
    /// Upper-triangular factor F with F*F equal to the input
    Cholesky,
    /// Determinant through the parametrization's product formula
    Det,
    /// Whether the matrix has rank one, read off the parameters
    Rank1,
}

#[derive(Subcommand)]
enum JacobiCmd {
    /// Matrix in, near-tridiagonal parameters out
    Extract,
    /// Parameters in, matrix out
    Reconstruct,
    /// Upper-triangular factor D with D*D equal to the input
    Cholesky,
    /// Determinant through the parametrization's product formula
    Det,
    /// Moment list in, symmetric tridiagonal generator out
    HankelToJ,
    /// Tridiagonal generator in, moment list out
    JToHankel {
        /// Highest moment index (even); defaults to twice the band length
        #[arg(long, value_name = "INT")]
        m: Option<usize>,
    },
}

#[derive(Subcommand)]
enum StateCmd {
    /// Partial-transpose separability test
    Ppt {
        /// Tensor split M,N when the input file carries none
        #[arg(long, value_name = "M,N", value_parser = parse_dims)]
        dims: Option<(usize, usize)>,
    },
    /// Kraus operators read off the factor rows
    Kraus {
        #[arg(long, value_name = "M,N", value_parser = parse_dims)]
        dims: Option<(usize, usize)>,
    },
    /// Hemisphere coordinates of a qubit density matrix
    QubitCoords,
    /// Density matrix of hemisphere coordinates
    QubitFromCoords,
}

#[derive(Subcommand)]
enum SepCmd {
    /// Print a pattern matrix for explicit class values
    Pattern {
        #[command(flatten)]
        family: FamilySpec,
        /// Value on same-class s positions, as re or re,im
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        a: Complex64,
        /// Value on same-class t positions
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        b: Complex64,
        /// Value on cross positions (conjugated below the diagonal)
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        c: Complex64,
    },
    /// Draw a separable patterned state
    GenPattern {
        #[command(flatten)]
        family: FamilySpec,
        /// Dimension of the unpatterned A side
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Draw a separable moment state
    GenHankel {
        /// A-side dimension; the state lives on 2m levels
        #[arg(long)]
        m: usize,
        /// Number of support nodes of the underlying measure
        #[arg(long, default_value_t = 3)]
        points: usize,
    },
    /// Rank-one Kraus separability test with certificate
    Rank1Test {
        #[arg(long, value_name = "M,N", value_parser = parse_dims)]
        dims: Option<(usize, usize)>,
    },
    /// Seven-item sufficient screen for 3x3-partite states
    Checklist {
        #[arg(long, value_name = "M,N", value_parser = parse_dims)]
        dims: Option<(usize, usize)>,
    },
    /// Run every detector over a list of states
    Battery,
}

#[derive(Args)]
struct FamilySpec {
    /// Index-partition family
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Pattern size (general family only)
    #[arg(long)]
    n: Option<usize>,
    /// s-class indices, comma separated (general family only)
    #[arg(long = "i-s", value_name = "LIST", value_delimiter = ',')]
    i_s: Vec<usize>,
    /// t-class indices, comma separated (general family only)
    #[arg(long = "i-t", value_name = "LIST", value_delimiter = ',')]
    i_t: Vec<usize>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    S1,
    S2,
    S3,
    SymmetricBlock,
    HankelPair,
    General,
}

impl FamilySpec {
    fn build(&self) -> Result<PatternFamily, CliError> {
        if self.family != FamilyArg::General
            && (self.n.is_some() || !self.i_s.is_empty() || !self.i_t.is_empty())
        {
            return Err(usage("--n, --i-s and --i-t apply to the general family only"));
        }
        Ok(match self.family {
            FamilyArg::S1 => PatternFamily::s1(),
            FamilyArg::S2 => PatternFamily::s2(),
            FamilyArg::S3 => PatternFamily::s3(),
            FamilyArg::SymmetricBlock => PatternFamily::symmetric_block(),
            FamilyArg::HankelPair => PatternFamily::hankel_pair(),
            FamilyArg::General => {
                let n = self.n.ok_or_else(|| usage("the general family needs --n"))?;
                PatternFamily::general(n, &self.i_s, &self.i_t)?
            }
        })
    }
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected M,N, got '{s}'"))?;
    let m = a.trim().parse::<usize>().map_err(|e| format!("bad dimension '{a}': {e}"))?;
    let n = b.trim().parse::<usize>().map_err(|e| format!("bad dimension '{b}': {e}"))?;
    Ok((m, n))
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = match s.split_once(',') {
        Some((re, im)) => (re, im),
        None => (s, "0"),
    };
    let re = re.trim().parse::<f64>().map_err(|e| format!("bad real part '{re}': {e}"))?;
    let im = im.trim().parse::<f64>().map_err(|e| format!("bad imaginary part '{im}': {e}"))?;
    Ok(Complex64::new(re, im))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let g = &cli.globals;
    let tol = Tolerances::new(
        g.tol_psd.unwrap_or(posparam_core::tolerance::DEFAULT_PSD_EIG_TOL),
        g.tol_rank.unwrap_or(posparam_core::tolerance::DEFAULT_RANK_TOL),
        g.tol_recon.unwrap_or(posparam_core::tolerance::DEFAULT_RECON_TOL),
    )
    .map_err(|e| usage(e.to_string()))?;
    match &cli.command {
        Command::Sc(cmd) => run_sc(cmd, g, &tol),
        Command::Jacobi(cmd) => run_jacobi(cmd, g, &tol),
        Command::State(cmd) => run_state(cmd, g, &tol),
        Command::Sep(cmd) => run_sep(cmd, g, &tol),
    }
}

fn read_input(g: &GlobalOpts) -> Result<String, CliError> {
    if g.input == "-" {
        std::io::read_to_string(std::io::stdin())
            .map_err(|e| usage(format!("cannot read stdin: {e}")))
    } else {
        std::fs::read_to_string(&g.input)
            .map_err(|e| usage(format!("cannot read {}: {e}", g.input)))
    }
}

/// Emits a JSON document; rejects `--out csv`, which only battery reports
/// understand.
fn emit_json<T: serde::Serialize>(g: &GlobalOpts, value: &T) -> Result<(), CliError> {
    if g.out == OutFormat::Csv {
        return Err(usage("csv output is only available for battery reports"));
    }
    print!("{}", io::to_json_line(value));
    Ok(())
}

/// Reads either a matrix file (extracting on the fly) or a parameter file,
/// told apart by their distinctive keys.
fn read_sc_params(g: &GlobalOpts, tol: &Tolerances) -> Result<SCParameters, CliError> {
    let value = io::parse_value(&read_input(g)?)?;
    if value.get("gammas").is_some() {
        io::from_value::<io::ScParamsFile>(value)?.into_params()
    } else if value.get("data").is_some() {
        let mat = io::from_value::<io::MatrixFile>(value)?.into_matrix()?;
        Ok(sc_extract(&mat, tol)?)
    } else {
        Err(usage("expected a matrix file (data) or a parameter file (gammas)"))
    }
}

fn read_jacobi_params(g: &GlobalOpts, tol: &Tolerances) -> Result<JacobiParameters, CliError> {
    let value = io::parse_value(&read_input(g)?)?;
    if value.get("c").is_some() {
        io::from_value::<io::JacobiParamsFile>(value)?.into_params()
    } else if value.get("data").is_some() {
        let mat = io::from_value::<io::MatrixFile>(value)?.into_matrix()?;
        Ok(jacobi_extract(&mat, tol)?)
    } else {
        Err(usage("expected a matrix file (data) or a parameter file (c)"))
    }
}

#[derive(serde::Serialize)]
struct DetOut {
    det: f64,
}

#[derive(serde::Serialize)]
struct RankOneOut {
    rank_one: bool,
}

fn run_sc(cmd: &ScCmd, g: &GlobalOpts, tol: &Tolerances) -> Result<(), CliError> {
    match cmd {
        ScCmd::Extract => {
            let mat = io::parse_json::<io::MatrixFile>(&read_input(g)?)?.into_matrix()?;
            let p = sc_extract(&mat, tol)?;
            emit_json(g, &io::ScParamsFile::from_params(&p))
        }
        ScCmd::Reconstruct => {
            let p = io::parse_json::<io::ScParamsFile>(&read_input(g)?)?.into_params()?;
            emit_json(g, &io::MatrixFile::from_matrix(&sc_reconstruct(&p)))
        }
        ScCmd::Cholesky => {
            let p = read_sc_params(g, tol)?;
            emit_json(g, &io::MatrixFile::from_matrix(&sc_cholesky(&p)))
        }
        ScCmd::Det => {
            let p = read_sc_params(g, tol)?;
            emit_json(g, &DetOut { det: sc_determinant(&p) })
        }
        ScCmd::Rank1 => {
            let p = read_sc_params(g, tol)?;
            emit_json(g, &RankOneOut { rank_one: sc_is_rank_one(&p, tol)? })
        }
    }
}

fn run_jacobi(cmd: &JacobiCmd, g: &GlobalOpts, tol: &Tolerances) -> Result<(), CliError> {
    match cmd {
        JacobiCmd::Extract => {
            let mat = io::parse_json::<io::MatrixFile>(&read_input(g)?)?.into_matrix()?;
            let p = jacobi_extract(&mat, tol)?;
            emit_json(g, &io::JacobiParamsFile::from_params(&p))
        }
        JacobiCmd::Reconstruct => {
            let p = io::parse_json::<io::JacobiParamsFile>(&read_input(g)?)?.into_params()?;
            emit_json(g, &io::MatrixFile::from_matrix(&jacobi_reconstruct(&p)))
        }
        JacobiCmd::Cholesky => {
            let p = read_jacobi_params(g, tol)?;
            emit_json(g, &io::MatrixFile::from_matrix(&jacobi_cholesky(&p)))
        }
        JacobiCmd::Det => {
            let p = read_jacobi_params(g, tol)?;
            emit_json(g, &DetOut { det: jacobi_determinant(&p) })
        }
        JacobiCmd::HankelToJ => {
            let h = io::parse_json::<io::MomentsFile>(&read_input(g)?)?.into_moments()?;
            let (j, s0) = tridiagonal_from_hankel(&h, tol)?;
            emit_json(g, &io::TridiagonalFile { s0, j: io::MatrixFile::from_matrix(&j) })
        }
        JacobiCmd::JToHankel { m } => {
            let file = io::parse_json::<io::TridiagonalFile>(&read_input(g)?)?;
            let j = file.j.into_matrix()?;
            let m = m.unwrap_or(2 * j.rows().saturating_sub(1));
            let h = hankel_from_tridiagonal(&j, file.s0, m)?;
            emit_json(g, &io::MomentsFile::from_moments(&h))
        }
    }
}

fn run_state(cmd: &StateCmd, g: &GlobalOpts, tol: &Tolerances) -> Result<(), CliError> {
    match cmd {
        StateCmd::Ppt { dims } => {
            let s = io::parse_json::<io::LooseStateFile>(&read_input(g)?)?
                .into_state(*dims, tol)?;
            emit_json(g, &io::VerdictFile::from_verdict(&ppt_verdict(&s, tol)))
        }
        StateCmd::Kraus { dims } => {
            let s = io::parse_json::<io::LooseStateFile>(&read_input(g)?)?
                .into_state(*dims, tol)?;
            let k = kraus_from_state(&s, tol)?;
            emit_json(g, &io::KrausFile::from_kraus(&k))
        }
        StateCmd::QubitCoords => {
            let mat = io::parse_json::<io::MatrixFile>(&read_input(g)?)?.into_matrix()?;
            let rho = DensityMatrix::new(mat, tol)?;
            let q = qubit_to_jacobi(&rho, tol)?;
            emit_json(g, &io::CoordsFile::from_coords(&q))
        }
        StateCmd::QubitFromCoords => {
            let q = io::parse_json::<io::CoordsFile>(&read_input(g)?)?.into_coords(tol)?;
            let rho = jacobi_to_qubit(&q, tol)?;
            emit_json(g, &io::MatrixFile::from_matrix(rho.mat()))
        }
    }
}

fn run_sep(cmd: &SepCmd, g: &GlobalOpts, tol: &Tolerances) -> Result<(), CliError> {
    match cmd {
        SepCmd::Pattern { family, a, b, c } => {
            let f = family.build()?;
            emit_json(g, &io::MatrixFile::from_matrix(&pattern_matrix(&f, *a, *b, *c)))
        }
        SepCmd::GenPattern { family, k } => {
            let f = family.build()?;
            let s = gen_pattern_state(&f, *k, g.seed)?;
            emit_json(g, &io::StateFile::from_state(&s))
        }
        SepCmd::GenHankel { m, points } => {
            let s = gen_hankel_state(*m, *points, g.seed)?;
            emit_json(g, &io::StateFile::from_state(&s))
        }
        SepCmd::Rank1Test { dims } => {
            let s = io::parse_json::<io::LooseStateFile>(&read_input(g)?)?
                .into_state(*dims, tol)?;
            emit_json(g, &io::VerdictFile::from_verdict(&rank1_kraus_test(&s, tol)))
        }
        SepCmd::Checklist { dims } => {
            let s = io::parse_json::<io::LooseStateFile>(&read_input(g)?)?
                .into_state(*dims, tol)?;
            let (passed, detail) = checklist_3x3(&s, tol)?;
            emit_json(g, &io::ChecklistFile::from_detail(passed, &detail))
        }
        SepCmd::Battery => {
            let files = io::parse_json::<io::StatesFile>(&read_input(g)?)?;
            let mut states = Vec::with_capacity(files.states.len());
            for s in files.states {
                states.push(s.into_state(None, tol)?);
            }
            let report = run_detector_battery(&states, tol);
            match g.out {
                OutFormat::Json => emit_json(g, &io::BatteryFile::from_report(&report)),
                OutFormat::Csv => {
                    print!("{}", report.to_csv());
                    Ok(())
                }
            }
        }
    }
}
