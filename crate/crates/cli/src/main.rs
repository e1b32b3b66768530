//! `logpoly`: minimal-volume polynomial enclosures and log-concave
//! majorants from the command line.
//!
//! Every command writes one JSON document (`format_version` 1) holding a
//! config echo and the result. Exit codes: 0 success, 2 invalid input,
//! 3 numerical failure.

mod commands;
mod examples;
mod io;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use logpoly::quad::DEFAULT_SEED;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "logpoly", version, about = "Minimal-volume polynomial enclosures and log-concave majorants")]
struct Cli {
    /// Seed for randomized direction sets and sampling.
    #[arg(long, global = true, env = "LOGPOLY_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimal-volume sublevel set enclosing a point cloud.
    Enclose(EncloseArgs),
    /// Problem 1: best majorant t·exp(−g^{1/d}).
    Solve1(SolveArgs),
    /// Problem 2: best majorant t·exp(−g).
    Solve2(SolveArgs),
    /// Contact-point certificate of a Problem 2 pair (t, g).
    Certify(CertifyArgs),
    /// Volume of {g ≤ 1} by two independent routes.
    Volume(PolyArgs),
    /// Moments ∫x^α e^{−g} of one total degree.
    Moments(MomentsArgs),
    /// Residuals of the radial moment identities.
    IdentityCheck(IdentityArgs),
    /// Closed-form examples run end to end.
    PaperExamples(ExamplesArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct EncloseArgs {
    /// CSV file, one point per row.
    #[arg(long)]
    pub points: String,
    #[arg(long)]
    pub degree: u32,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub active_tol: f64,
    /// Sphere quadrature level; the default for the dimension when absent.
    #[arg(long)]
    pub level: Option<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    /// JSON description of f.
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub degree: u32,
    #[arg(long, default_value_t = 256)]
    pub dirs: usize,
    #[arg(long, default_value_t = 200)]
    pub lambdas: usize,
    /// Final bracket width in log t.
    #[arg(long, default_value_t = 1e-6)]
    pub ttol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub enclosure_tol: f64,
    /// Grid points of the Problem 1 search.
    #[arg(long, default_value_t = 33)]
    pub grid: usize,
    #[arg(long)]
    pub level: Option<u32>,
    /// Also write the (t, v, φ) trace as CSV.
    #[arg(long)]
    pub plot_csv: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct CertifyArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long)]
    pub t: f64,
    /// JSON polynomial.
    #[arg(long)]
    pub g: String,
    /// Directions searched for touch points; a dimension default when absent.
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub level: Option<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct PolyArgs {
    #[arg(long)]
    pub g: String,
    #[arg(long)]
    pub level: Option<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct MomentsArgs {
    #[arg(long)]
    pub g: String,
    /// Total degree of the moments; the degree of g when absent.
    #[arg(long)]
    pub k: Option<u32>,
    /// Report the moment map ∫x^α e^{−g} / Γ(n/d+1) instead.
    #[arg(long)]
    pub phi: bool,
    #[arg(long)]
    pub level: Option<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct IdentityArgs {
    #[arg(long)]
    pub g: String,
    /// Comma-separated exponents; every α of degree d when absent.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Comma-separated r values.
    #[arg(long, default_value = "0,1")]
    pub r: String,
    /// Comma-separated m values; "1,d" when absent.
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long)]
    pub level: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    All,
    Examples1,
    Final,
    Fixtures,
}

#[derive(Debug, Args, Serialize)]
pub struct ExamplesArgs {
    #[arg(long, value_enum, default_value_t = Which::All)]
    pub which: Which,
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Numerical { kind: &'static str, message: String },
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numerical { .. } => 3,
        }
    }
}

impl From<logpoly::Error> for Failure {
    fn from(e: logpoly::Error) -> Self {
        use logpoly::Error as E;
        match e {
            E::NewtonFailure { ref trace, .. } => Failure::Numerical {
                kind: "newton_failure",
                message: format!("{e}; {}", trace.join("; ")),
            },
            E::CertificationFailed { .. } => Failure::Numerical {
                kind: "certification_failed",
                message: e.to_string(),
            },
            other => Failure::Input(other.to_string()),
        }
    }
}

pub struct Output {
    pub config: serde_json::Value,
    pub result: serde_json::Value,
    /// Exit with 3 after writing, for example when a checked value misses
    /// its tolerance.
    pub failed: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let name = command_name(&cli.command);
    let outcome = match &cli.command {
        Command::Enclose(a) => commands::enclose(a, cli.seed),
        Command::Solve1(a) => commands::solve(a, logpoly::Mode::P1, cli.seed),
        Command::Solve2(a) => commands::solve(a, logpoly::Mode::P2, cli.seed),
        Command::Certify(a) => commands::certify(a, cli.seed),
        Command::Volume(a) => commands::volume(a, cli.seed),
        Command::Moments(a) => commands::moments(a, cli.seed),
        Command::IdentityCheck(a) => commands::identity_check(a, cli.seed),
        Command::PaperExamples(a) => examples::run(a, cli.seed),
    };
    match outcome {
        Ok(out) => {
            let doc = serde_json::json!({
                "format_version": FORMAT_VERSION,
                "command": name,
                "config": with_seed(out.config, cli.seed),
                "result": out.result,
            });
            if let Err(e) = io::write_json(cli.out.as_deref(), &doc) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if out.failed {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(f) => {
            let (kind, message) = match &f {
                Failure::Input(m) => ("invalid_input", m.clone()),
                Failure::Numerical { kind, message } => (*kind, message.clone()),
            };
            eprintln!("error: {message}");
            let doc = serde_json::json!({
                "format_version": FORMAT_VERSION,
                "command": name,
                "error": { "kind": kind, "message": message, "exit_code": f.code() },
            });
            let _ = io::write_json(cli.out.as_deref(), &doc);
            ExitCode::from(f.code())
        }
    }
}

fn with_seed(mut config: serde_json::Value, seed: u64) -> serde_json::Value {
    if let Some(obj) = config.as_object_mut() {
        obj.insert("seed".into(), seed.into());
    }
    config
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Enclose(_) => "enclose",
        Command::Solve1(_) => "solve1",
        Command::Solve2(_) => "solve2",
        Command::Certify(_) => "certify",
        Command::Volume(_) => "volume",
        Command::Moments(_) => "moments",
        Command::IdentityCheck(_) => "identity-check",
        Command::PaperExamples(_) => "paper-examples",
    }
}
