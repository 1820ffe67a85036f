//! Command-line front end.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 solver did not
//! converge, 3 tube certificate failed.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::config::{
    emit_grid_function, fmt_f64, grid_csv, grid_json, time_scale_from_json, Format, LinearConfig,
    RunConfig,
};
use crate::error::Error;
use crate::linear_bvp::{periodic_residual, solve_linear};
use crate::nabla::nabla_exp;
use crate::solver::{solve, Scheme};
use crate::timescale::TimeScaleSpec;
use crate::tube::{default_n_dirs, verify_tube, DEFAULT_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_CERTIFICATE: i32 = 3;

const DEFAULT_OUT_DIR: &str = "tubesolve-out";

#[derive(Debug, Parser)]
#[command(
    name = "tubesolve",
    version,
    about = "Nabla calculus on time scales and tube-solution solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve x^nabla = f(t, x), x(a) = x(b) inside a tube; writes trajectory and report.
    Solve(SolveArgs),
    /// Check the three tube conditions for (v, M); writes a certificate report.
    VerifyTube(VerifyArgs),
    /// Solve the linear periodic problem x^nabla - x = g.
    Linear(DataArgs),
    /// Emit the nabla exponential e_eps(., t0).
    Exp(ExpArgs),
    /// Dump grid points, graininess and the regressivity check.
    Grid(DataArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (trajectory.csv|json and report.json).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Trajectory encoding.
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol_fp: Option<f64>,
    #[arg(long)]
    tol_res: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Keep the whole gap history in report.json.
    #[arg(long)]
    full_history: bool,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum SchemeArg {
    Shifted,
    Direct,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (certificate.json).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    n_dirs: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct ExpArgs {
    #[arg(long)]
    eps: f64,
    /// Initial time; must be a grid point.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    t0: f64,
    /// Time scale JSON file.
    #[arg(long, conflicts_with = "uniform", required_unless_present = "uniform")]
    scale: Option<PathBuf>,
    /// Uniform grid as LO:HI:STEP.
    #[arg(long)]
    uniform: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
enum Failure {
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Regressivity { .. } | Error::RegressivityScalar { .. } => {
                Failure::Input(format!("regressivity violation: {e}"))
            }
            Error::Config(msg) => Failure::Input(format!("invalid configuration: {msg}")),
            other => Failure::Input(other.to_string()),
        }
    }
}

type CmdResult = std::result::Result<i32, Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read `{}`: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> std::result::Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| Failure::Input(format!("cannot write `{}`: {e}", path.display())))
}

fn ensure_dir(path: &Path) -> std::result::Result<(), Failure> {
    std::fs::create_dir_all(path)
        .map_err(|e| Failure::Input(format!("cannot create `{}`: {e}", path.display())))
}

fn emit(
    out: Option<&Path>,
    contents: &str,
    stdout: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    match out {
        Some(path) => write_file(path, contents),
        None => stdout
            .write_all(contents.as_bytes())
            .map_err(|e| Failure::Input(format!("cannot write output: {e}"))),
    }
}

fn load_run(path: &Path) -> std::result::Result<RunConfig, Failure> {
    let text = read(path)?;
    Ok(RunConfig::from_json(&text)?)
}

fn cmd_solve(args: SolveArgs, stdout: &mut dyn Write) -> CmdResult {
    let cfg = load_run(&args.config)?;
    let mut run = cfg.build()?;
    let s = &mut run.solver;
    if let Some(v) = args.max_iter {
        s.max_iter = v;
    }
    if let Some(v) = args.tol_fp {
        s.tol_fp = v;
    }
    if let Some(v) = args.tol_res {
        s.tol_res = v;
    }
    if let Some(v) = args.theta {
        s.theta = v;
    }
    if let Some(v) = args.scheme {
        s.scheme = match v {
            SchemeArg::Shifted => Scheme::Shifted,
            SchemeArg::Direct => Scheme::Direct,
        };
    }
    let format = args.format.or(cfg.output.format).unwrap_or_default();
    let out_dir = args
        .out
        .or_else(|| cfg.output.path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

    let (x, report) = solve(&run.problem, &run.tube, &run.solver)?;

    ensure_dir(&out_dir)?;
    let traj_name = match format {
        Format::Csv => "trajectory.csv",
        Format::Json => "trajectory.json",
    };
    write_file(&out_dir.join(traj_name), &emit_grid_function(&x, format))?;
    let json = serde_json::to_string_pretty(&report.to_json(args.full_history))
        .expect("report serializes")
        + "\n";
    write_file(&out_dir.join("report.json"), &json)?;

    let _ = writeln!(
        stdout,
        "converged={} iters={} residual={} tube_max={}",
        report.converged,
        report.iterations,
        fmt_f64(report.final_residual),
        fmt_f64(report.max_tube_residual)
    );
    Ok(if report.converged {
        EXIT_OK
    } else {
        EXIT_NOT_CONVERGED
    })
}

fn cmd_verify_tube(args: VerifyArgs, stdout: &mut dyn Write) -> CmdResult {
    let cfg = load_run(&args.config)?;
    let run = cfg.build()?;
    let n_dirs = args
        .n_dirs
        .or(cfg.verify.n_dirs)
        .unwrap_or_else(|| default_n_dirs(run.problem.dim()));
    if n_dirs < 2 {
        return Err(Failure::Input("n_dirs must be at least 2".into()));
    }
    let tol = args.tol.or(cfg.verify.tol).unwrap_or(DEFAULT_TOL);
    let report = verify_tube(&run.problem, &run.tube, n_dirs, tol)?;

    let out_dir = args
        .out
        .or_else(|| cfg.output.path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    ensure_dir(&out_dir)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_file(&out_dir.join("certificate.json"), &json)?;

    let margin = |m: Option<f64>| m.map(fmt_f64).unwrap_or_else(|| "none".into());
    let _ = writeln!(
        stdout,
        "passed={} condition1={} condition2={} condition3={}",
        report.passed,
        margin(report.condition1.worst_margin),
        margin(report.condition2.worst_margin),
        margin(report.condition3.worst_margin)
    );
    Ok(if report.passed {
        EXIT_OK
    } else {
        EXIT_CERTIFICATE
    })
}

fn cmd_linear(args: DataArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let text = read(&args.config)?;
    let cfg = LinearConfig::from_json(&text)?;
    let (scale, g) = cfg.build()?;
    let x = solve_linear(&scale, &g)?;
    let res = periodic_residual(&x, 1.0, &g)?;
    let format = args.format.or(cfg.output.format).unwrap_or_default();
    let out = args
        .out
        .or_else(|| cfg.output.path.as_ref().map(PathBuf::from));
    emit(out.as_deref(), &emit_grid_function(&x, format), stdout)?;
    let summary = format!(
        "residual={} boundary={}",
        fmt_f64(res.equation),
        fmt_f64(res.boundary)
    );
    // keep stdout clean when it carries the data
    let sink: &mut dyn Write = if out.is_some() { stdout } else { stderr };
    let _ = writeln!(sink, "{summary}");
    Ok(EXIT_OK)
}

fn parse_uniform(s: &str) -> std::result::Result<TimeScaleSpec, Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>();
    match (parts.len(), nums) {
        (3, Ok(v)) => Ok(TimeScaleSpec::uniform(v[0], v[1], v[2])),
        _ => Err(Failure::Input(format!(
            "invalid --uniform `{s}`, expected LO:HI:STEP"
        ))),
    }
}

fn cmd_exp(args: ExpArgs, stdout: &mut dyn Write) -> CmdResult {
    let spec = match (&args.scale, &args.uniform) {
        (Some(path), _) => time_scale_from_json(&read(path)?)?,
        (None, Some(u)) => parse_uniform(u)?,
        (None, None) => {
            return Err(Failure::Input(
                "one of --scale or --uniform is required".into(),
            ))
        }
    };
    let scale = Arc::new(spec.build()?);
    let t0 = scale.index_of(args.t0).ok_or_else(|| {
        Failure::Input(format!("t0 = {} is not a point of the time scale", args.t0))
    })?;
    let e = nabla_exp(&scale, args.eps, t0)?;
    emit(
        args.out.as_deref(),
        &emit_grid_function(&e, args.format.unwrap_or_default()),
        stdout,
    )?;
    Ok(EXIT_OK)
}

fn cmd_grid(args: DataArgs, stdout: &mut dyn Write) -> CmdResult {
    let spec = time_scale_from_json(&read(&args.config)?)?;
    let scale = spec.build()?;
    let body = match args.format.unwrap_or_default() {
        Format::Csv => grid_csv(&scale),
        Format::Json => grid_json(&scale),
    };
    emit(args.out.as_deref(), &body, stdout)?;
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs one command.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INPUT,
            };
            let sink: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a, stdout),
        Command::VerifyTube(a) => cmd_verify_tube(a, stdout),
        Command::Linear(a) => cmd_linear(a, stdout, stderr),
        Command::Exp(a) => cmd_exp(a, stdout),
        Command::Grid(a) => cmd_grid(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INPUT
        }
    }
}
