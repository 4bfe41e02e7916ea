//! `menger`: runs curvature, flatness and energy experiments from a JSON
//! config and writes machine-readable reports.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("budget refused: {0}")]
    Budget(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Budget(_) => 4,
        }
    }
}

impl From<menger_core::Error> for CliError {
    fn from(e: menger_core::Error) -> Self {
        use menger_core::Error as E;
        match e {
            E::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "menger", version, about = "Menger curvature and flatness experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "MENGER_THREADS")]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Statistics of a discrete curvature over random tuples.
    Curvature,
    /// β and θ over a radii schedule, with power-law fits.
    BetaScan,
    /// E_p^l or the tangent-point energy.
    Energy,
    /// Energy, η–d balance and measured exponents against λ/κ and α.
    ScalingCheck,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Curvature => "curvature",
            Command::BetaScan => "beta-scan",
            Command::Energy => "energy",
            Command::ScalingCheck => "scaling-check",
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let mut loaded = config::load(path)?;
    if let Some(seed) = cli.seed {
        loaded.config.seed = seed;
    }
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::Data(format!("{}: {e}", cli.out.display())))?;
    let ctx = commands::Context::new(loaded, cli.command.name(), &cli.out)?;
    match cli.command {
        Command::Curvature => commands::curvature(&ctx),
        Command::BetaScan => commands::beta_scan(&ctx),
        Command::Energy => commands::energy(&ctx),
        Command::ScalingCheck => commands::scaling_check(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("menger: {e}");
            ExitCode::from(e.code())
        }
    }
}
