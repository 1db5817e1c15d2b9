//! `vecscal`: decompositions, multipole tables and verification suites from the command line.
//!
//! Exit codes: 0 success, 1 I/O, usage or configuration error, 2 gauge violation,
//! 3 numerical failure (ill-conditioned fit or a failed verification check).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use vecscal_core::verify::Suite;

mod commands;
mod input;
mod manifest;

use input::BuiltinGrid;

#[derive(Debug, Parser)]
#[command(name = "vecscal", version, about = "Spectral vector-field scalarization and multipole analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split a vector field into Helmholtz parts or Debye potentials
    Decompose(DecomposeArgs),
    /// Rebuild a vector field from the files written by `decompose`
    Synthesize(SynthesizeArgs),
    /// Multipole moments and form factors of a current density
    Moments(MomentsArgs),
    /// Run verification suites
    Verify(VerifyArgs),
    /// Toroidal solenoid anapole demonstration
    DemoAnapole(DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Helmholtz,
    Debye,
}

#[derive(Debug, Args, Serialize)]
pub struct DecomposeArgs {
    /// vsf-1 vector field or builtin:<source>
    #[arg(long)]
    pub input: String,
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Output directory
    #[arg(long)]
    pub output: PathBuf,
    /// Gauge tolerance
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub grid: BuiltinGrid,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthesizeArgs {
    /// Directory written by `decompose`
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Output vsf-1 file
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct MomentsArgs {
    /// vsf-1 current density or builtin:<source>
    #[arg(long)]
    pub input: String,
    #[arg(long, default_value_t = 3)]
    pub lmax: usize,
    #[arg(long, default_value_t = 0.01)]
    pub kmin: f64,
    #[arg(long, default_value_t = 0.06)]
    pub kmax: f64,
    #[arg(long, default_value_t = 12)]
    pub nk: usize,
    /// Highest mean-radius order
    #[arg(long, default_value_t = 2)]
    pub nmax: usize,
    /// Skip the k → 0 Siegert fit
    #[arg(long)]
    pub no_fit: bool,
    /// Output CSV file
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub grid: BuiltinGrid,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// algebra, decompose, multipole or all
    #[arg(long, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = 8)]
    pub lmax: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Tolerance for operator identities
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Random trials per identity
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// JSON report file
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DemoArgs {
    /// Gaussian smoothing width of the winding
    #[arg(long, default_value_t = 0.35)]
    pub sigma: f64,
    /// Major radius of the torus
    #[arg(long = "R", default_value_t = 1.5)]
    pub major: f64,
    /// Minor radius of the torus
    #[arg(long = "a", default_value_t = 0.0)]
    pub minor: f64,
    #[arg(long, default_value_t = 0.01)]
    pub kmin: f64,
    #[arg(long, default_value_t = 0.06)]
    pub kmax: f64,
    #[arg(long, default_value_t = 12)]
    pub nk: usize,
    /// Output directory
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub grid: BuiltinGrid,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            eprintln!("\n{}", Cli::command().render_usage());
            return ExitCode::from(1);
        }
    };
    let result = match &cli.command {
        Command::Decompose(a) => commands::decompose(a),
        Command::Synthesize(a) => commands::synthesize(a),
        Command::Moments(a) => commands::moments(a),
        Command::Verify(a) => commands::verify(a),
        Command::DemoAnapole(a) => commands::demo_anapole(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
