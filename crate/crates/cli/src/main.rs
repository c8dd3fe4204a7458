//! `polarity-lab`: equilibria, dispersion relations, stability maps and
//! simulations of the bulk-surface polarity model from a JSON config.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::config::{parse_config, Command};
use crate::error::CliError;

/// Caps the worker threads of parallel sweeps.
const THREADS_VAR: &str = "POLARITY_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "polarity-lab", version = output::VERSION, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON config; every field is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed (overrides `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Homogeneous equilibria and their sign conditions.
    Equilibrium,
    /// Per-mode verdicts for the full or the reduced model.
    Stability,
    /// Dispersion function on a log-spaced omega grid.
    Dispersion,
    /// Reduced-model growth rate against the surface eigenvalue.
    GrowthCurve,
    /// One-parameter stability map.
    Scan,
    /// Nonlinear axisymmetric simulation.
    Simulate,
    /// Dimensional constants to nondimensional parameters.
    Nondim,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::Equilibrium => Command::Equilibrium,
            Cmd::Stability => Command::Stability,
            Cmd::Dispersion => Command::Dispersion,
            Cmd::GrowthCurve => Command::GrowthCurve,
            Cmd::Scan => Command::Scan,
            Cmd::Simulate => Command::Simulate,
            Cmd::Nondim => Command::Nondim,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n >= 1).ok_or_else(|| {
        CliError::Validation(vec![format!("{THREADS_VAR}: expected a positive integer, got \"{raw}\"")])
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Validation(vec![format!("{THREADS_VAR}: {e}")]))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let start = Instant::now();
    configure_threads()?;
    let command = Command::from(cli.command);
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
        None => "{}".to_string(),
    };
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    if let Some(dir) = &cli.output {
        cfg.output_dir = dir.clone();
    }
    let artifacts = commands::run(command, &cfg)?;
    let written = output::emit_outputs(&cfg.output_dir, command, &cfg, &artifacts, start.elapsed())?;
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.kind().to_string();
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or(&text).trim_start_matches("error: ");
            eprintln!("error kind=usage_error exit=2: {first}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::from(e.exit_code())
        }
    }
}
