//! `lindstedt`: batch front end for solving, verifying and analysing
//! Lindstedt series.
//!
//! Every command writes its artifacts to `--out` and exits with 0 on
//! success, 1 when a mathematical contract fails and 2 on unusable input.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use error::CliError;

#[derive(Parser)]
#[command(name = "lindstedt", version, about = "Lindstedt series for quasi-periodic motions")]
struct Cli {
    /// Directory receiving reports and data files.
    #[arg(long, global = true, default_value = "lindstedt-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the order-by-order recursion: series CSV, report JSON, norms data.
    Solve(SolveArgs),
    /// Compare tree sums with the recursion at every order up to K.
    VerifyTrees(VerifyArgs),
    /// Bryuno sum of a rotation number or vector.
    Bryuno(BryunoArgs),
    /// Radius, Borel, Davie, measure and attractivity checks on one model.
    Analyze(AnalyzeArgs),
    /// Excluded parameter fraction under repeated halving of ε₀.
    Measure(MeasureArgs),
    /// Direct integration of the dissipative model against its response solution.
    Integrate(IntegrateArgs),
}

#[derive(Args, Serialize)]
pub struct SolveArgs {
    /// Model document (JSON).
    #[arg(long)]
    #[serde(skip)]
    pub spec: PathBuf,
    /// Truncation order; overrides the document.
    #[arg(long)]
    pub order: Option<usize>,
    /// Fit the residual exponent from two values `ε₁,ε₂`.
    #[arg(long, value_delimiter = ',')]
    pub residual_eps: Option<Vec<f64>>,
}

#[derive(Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    #[serde(skip)]
    pub spec: PathBuf,
    #[arg(long)]
    pub order: Option<usize>,
    /// Largest admissible relative error.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Args, Serialize)]
pub struct BryunoArgs {
    /// Rotation number: a number, `golden`, `silver`, or a JSON component
    /// such as `{"cf":{"head":[1,200],"period":[1]}}`.
    #[arg(long, conflicts_with_all = ["omega", "spec"])]
    pub alpha: Option<String>,
    /// Flow frequency as a JSON array of components, e.g. `[1,"golden"]`.
    #[arg(long, conflicts_with = "spec")]
    pub omega: Option<String>,
    /// Take ω from a model document.
    #[arg(long)]
    #[serde(skip)]
    pub spec: Option<PathBuf>,
    /// Terms of the scalar sum (default 60) or levels of the vector sum (default 12).
    #[arg(long)]
    pub n_max: Option<usize>,
}

#[derive(Args, Serialize, Clone)]
pub struct MeasureParams {
    /// Normal eigenvalues `a_i`; lower-tori documents supply them.
    #[arg(long, value_delimiter = ',')]
    pub a: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.5)]
    pub gamma: f64,
    /// Diophantine exponent of ω; defaults to that of the vector.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Defaults to `τ + r + 1`.
    #[arg(long)]
    pub tau_prime: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub eps0: f64,
    #[arg(long, default_value_t = 3)]
    pub halvings: usize,
    #[arg(long, default_value_t = 200)]
    pub nu_max: u32,
    #[arg(long, default_value_t = 1 << 16)]
    pub grid_n: usize,
}

#[derive(Args, Serialize)]
pub struct AnalyzeArgs {
    #[arg(long)]
    #[serde(skip)]
    pub spec: PathBuf,
    #[arg(long)]
    pub order: Option<usize>,
    /// Radius of convergence from the order norms.
    #[arg(long)]
    pub radius: bool,
    /// Radius ranking of standard-map rotation numbers against their Bryuno sums.
    #[arg(long)]
    pub davie: bool,
    /// Growth class of the norms before and after division by k!.
    #[arg(long)]
    pub borel: bool,
    /// Excluded-measure sweep.
    #[arg(long)]
    pub measure: bool,
    /// Attractivity of the response solution (dissipative model).
    #[arg(long)]
    pub integrate: bool,
    /// Extra rotation numbers for `--davie`, same syntax as `bryuno --alpha`.
    #[arg(long = "alpha")]
    pub alphas: Vec<String>,
    /// ε for `--integrate`.
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[command(flatten)]
    pub measure_params: MeasureParams,
}

#[derive(Args, Serialize)]
pub struct MeasureArgs {
    /// Take ω (and the `a_i` of lower tori) from a model document.
    #[arg(long, conflicts_with = "omega")]
    #[serde(skip)]
    pub spec: Option<PathBuf>,
    /// Flow frequency as a JSON array of components.
    #[arg(long)]
    pub omega: Option<String>,
    #[command(flatten)]
    pub params: MeasureParams,
}

#[derive(Args, Serialize)]
pub struct IntegrateArgs {
    #[arg(long)]
    #[serde(skip)]
    pub spec: PathBuf,
    #[arg(long)]
    pub eps: f64,
    /// Order of the reference response solution.
    #[arg(long, default_value_t = 6)]
    pub order: usize,
    /// Defaults to 200 forcing periods.
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Defaults to a thousandth of a forcing period.
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub offset: f64,
    /// Points kept in the trajectory data files.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Also fit the relaxation rate with the oscillating forcing removed.
    #[arg(long)]
    pub relaxation: bool,
}

fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var("LINDSTEDT_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map_err(|_| CliError::input(format!("LINDSTEDT_THREADS must be a count, got {v:?}"))),
        _ => Ok(0),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    lindstedt::parallel::set_threads(threads_from_env()?);
    match &cli.command {
        Command::Solve(a) => commands::solve(&cli.out, a),
        Command::VerifyTrees(a) => commands::verify_trees(&cli.out, a),
        Command::Bryuno(a) => commands::bryuno(&cli.out, a),
        Command::Analyze(a) => commands::analyze(&cli.out, a),
        Command::Measure(a) => commands::measure(&cli.out, a),
        Command::Integrate(a) => commands::integrate(&cli.out, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lindstedt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
