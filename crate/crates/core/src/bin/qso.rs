use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use volterra_qso::cli::{run, Command};

/// Experiments with Volterra quadratic stochastic operators.
///
/// Log verbosity is read from QSO_LOG (e.g. `QSO_LOG=info`).
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify a 4x4 matrix and report the canonical form.
    Classify(Paths),
    /// Run trajectories and write CSV diagnostics.
    Simulate(Paths),
    /// Synthesize a monomial Lyapunov function and check it along trajectories.
    Lyapunov(Paths),
    /// List fixed points with their multipliers and types.
    FixedPoints(Paths),
}

#[derive(Args)]
struct Paths {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QSO_LOG", "warn")).init();
    let cli = Cli::parse();
    let (cmd, paths) = match cli.command {
        Cmd::Classify(p) => (Command::Classify, p),
        Cmd::Simulate(p) => (Command::Simulate, p),
        Cmd::Lyapunov(p) => (Command::Lyapunov, p),
        Cmd::FixedPoints(p) => (Command::FixedPoints, p),
    };
    match run(cmd, &paths.config, paths.out.as_deref()) {
        Ok(dir) => {
            log::info!("wrote {}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
