use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gauss_revert::io::{complex_matrix_from_rows, to_json_string, ChannelJson, StateJson};
use gauss_revert::linalg::{herm_eigenvalues, min_eig};
use gauss_revert::phase_flip::{sweep, write_csv, SweepSpec};
use gauss_revert::qudit::{
    build_local_model, clt_char_error, default_t_grid, optimal_rate, CltRow, QuditChannel, QuditChannelJson,
    QuditMap, QuditState, QuditStateJson,
};
use gauss_revert::reversal::ProblemJson;
use gauss_revert::{
    is_cp, optimal_k, validate_state, GaussianChannel, HybridGaussianState, ReversalProblem, RevertError,
    Tolerances, ValidityReport,
};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

/// Optimal reversal of Gaussian and qudit channels.
#[derive(Parser, Debug)]
#[command(name = "gauss-revert", version)]
struct Cli {
    /// Absolute tolerance for PSD tests.
    #[arg(long, global = true)]
    psd_tol: Option<f64>,
    /// Tolerance on k for the bisection cross-check.
    #[arg(long, global = true)]
    bisect_tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a state, channel, reversal problem, qudit state or qudit channel.
    Validate {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve a Gaussian reversal problem `{channel: {X, Y}, family_cov, K, C}`.
    RevertGaussian {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Asymptotic reversal rate of a qudit channel at a state.
    RevertQudit {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Phase-flip k* over the default grid, as CSV.
    PhaseflipSweep {
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Characteristic-function distance to the Gaussian limit for each local coordinate.
    CltCheck {
        state: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
        n: Vec<u32>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Domain(RevertError),
    Io(String),
}

impl From<RevertError> for Failure {
    fn from(e: RevertError) -> Self {
        Failure::Domain(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn read_value(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

/// Shape errors are parse errors; content errors surface later as domain errors.
fn parse<T: DeserializeOwned>(v: Value, what: &str) -> CliResult<T> {
    serde_json::from_value(v).map_err(|e| Failure::Io(format!("not a {what}: {e}")))
}

fn emit<T: Serialize>(value: &T, output: Option<&Path>) -> CliResult<()> {
    let mut text = to_json_string(value)?;
    text.push('\n');
    match output {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn load_problem(v: Value, tol: &Tolerances) -> CliResult<ReversalProblem> {
    let p = ReversalProblem::try_from(parse::<ProblemJson>(v, "reversal problem")?)?;
    Ok(ReversalProblem::new(p.channel, p.family_cov, tol)?)
}

fn load_qudit_state(v: Value, tol: &Tolerances) -> CliResult<QuditState> {
    let j: QuditStateJson = parse(v, "qudit state")?;
    let rho = complex_matrix_from_rows(&j.rho)?;
    if rho.nrows() != j.d {
        return Err(RevertError::DimensionMismatch(format!("d = {} but rho is {}×{}", j.d, rho.nrows(), rho.ncols())).into());
    }
    Ok(QuditState::new(rho, tol)?)
}

fn load_qudit_channel(v: Value, tol: &Tolerances) -> CliResult<QuditChannel> {
    let j: QuditChannelJson = parse(v, "qudit channel")?;
    let c = match (&j.kraus, &j.choi) {
        (Some(k), None) => QuditChannel::from_kraus(k.iter().map(complex_matrix_from_rows).collect::<Result<_, _>>()?)?,
        (None, Some(c)) => QuditChannel::from_choi(&complex_matrix_from_rows(c)?, tol)?,
        _ => return Err(Failure::Io("qudit channel needs exactly one of \"kraus\" or \"choi\"".into())),
    };
    if c.dim() != j.d {
        return Err(RevertError::DimensionMismatch(format!("d = {} but operators act on d = {}", j.d, c.dim())).into());
    }
    Ok(c)
}

#[derive(Serialize)]
struct Report {
    kind: &'static str,
    valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    state: Option<ValidityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    channel: Option<ValidityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_eig: Option<f64>,
}

fn has(v: &Value, key: &str) -> bool {
    v.get(key).is_some()
}

fn validate(v: Value, tol: &Tolerances) -> CliResult<(Report, Option<RevertError>)> {
    if has(&v, "family_cov") {
        let p = ReversalProblem::try_from(parse::<ProblemJson>(v, "reversal problem")?)?;
        let s = validate_state(&HybridGaussianState::centered(p.sig(), p.family_cov.clone())?, tol);
        let c = is_cp(&p.channel, tol);
        let err = if !c.pass {
            Some(RevertError::NotCp { min_eig: c.min_eig })
        } else if !s.pass {
            Some(RevertError::InvalidState(format!("λ_min(V + iΩ/2) = {}", s.min_eig)))
        } else {
            None
        };
        let report = Report { kind: "reversal_problem", valid: err.is_none(), state: Some(s), channel: Some(c), min_eig: None };
        return Ok((report, err));
    }
    if has(&v, "X") && has(&v, "Y") {
        let g = GaussianChannel::try_from(parse::<ChannelJson>(v, "Gaussian channel")?)?;
        let c = is_cp(&g, tol);
        let err = (!c.pass).then_some(RevertError::NotCp { min_eig: c.min_eig });
        return Ok((Report { kind: "gaussian_channel", valid: c.pass, state: None, channel: Some(c), min_eig: None }, err));
    }
    if has(&v, "cov") {
        let s = HybridGaussianState::try_from(parse::<StateJson>(v, "Gaussian state")?)?;
        let r = validate_state(&s, tol);
        let err = (!r.pass).then(|| RevertError::InvalidState(format!("λ_min(V + iΩ/2) = {}", r.min_eig)));
        return Ok((Report { kind: "gaussian_state", valid: r.pass, state: Some(r), channel: None, min_eig: None }, err));
    }
    if has(&v, "rho") {
        let s = load_qudit_state(v, tol)?;
        let m = herm_eigenvalues(s.rho())[0];
        return Ok((Report { kind: "qudit_state", valid: true, state: None, channel: None, min_eig: Some(m) }, None));
    }
    if has(&v, "kraus") || has(&v, "choi") {
        let c = load_qudit_channel(v, tol)?;
        let m = min_eig(&c.choi());
        return Ok((Report { kind: "qudit_channel", valid: true, state: None, channel: None, min_eig: Some(m) }, None));
    }
    Err(Failure::Io("unrecognized input: expected a state, channel or reversal problem".into()))
}

fn run(cli: Cli) -> CliResult<()> {
    let mut tol = Tolerances::default();
    if let Some(t) = cli.psd_tol {
        tol.psd_tol = t;
    }
    if let Some(t) = cli.bisect_tol {
        tol.bisect_tol = t;
    }
    tol.validate()?;

    match cli.command {
        Command::Validate { input, output } => {
            let (report, err) = validate(read_value(&input)?, &tol)?;
            emit(&report, output.as_deref())?;
            err.map_or(Ok(()), |e| Err(e.into()))
        }
        Command::RevertGaussian { input, output } => {
            let p = load_problem(read_value(&input)?, &tol)?;
            emit(&optimal_k(&p, &tol)?, output.as_deref())
        }
        Command::RevertQudit { channel, state, output } => {
            let c = load_qudit_channel(read_value(&channel)?, &tol)?;
            let s = load_qudit_state(read_value(&state)?, &tol)?;
            emit(&optimal_rate(&c, &s, &tol)?, output.as_deref())
        }
        Command::PhaseflipSweep { output } => {
            let rows = sweep(&SweepSpec::default(), &tol)?;
            let file = fs::File::create(&output).map_err(|e| Failure::Io(format!("{}: {e}", output.display())))?;
            let mut w = std::io::BufWriter::new(file);
            write_csv(&rows, &mut w)?;
            w.flush()?;
            Ok(())
        }
        Command::CltCheck { state, n, output } => {
            let s = load_qudit_state(read_value(&state)?, &tol)?;
            let m = build_local_model(&s, &tol)?;
            let grid = default_t_grid();
            let mut rows = Vec::new();
            for coordinate in 0..m.basis_ops.len() {
                for &n in &n {
                    let max_error = clt_char_error(&m, coordinate, n, &grid)?;
                    rows.push(CltRow { coordinate, n, max_error });
                }
            }
            emit(&rows, output.as_deref())
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("GAUSS_REVERT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::Io(format!("GAUSS_REVERT_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Io(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(e)) => {
            let body = serde_json::json!({ "error": e.code(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
