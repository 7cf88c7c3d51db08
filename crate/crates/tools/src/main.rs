use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use so3bethe_tools::commands::EXIT_USAGE;
use so3bethe_tools::{run, Command, RunConfig};

#[derive(Parser)]
#[command(
    name = "so3bethe",
    version,
    about = "Algebraic Bethe ansatz checks for so(3)-invariant spin chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// RNG seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Residual tolerance, overriding the defaults.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// R-matrix, monodromy, zero-mode and Gauss-coordinate identities.
    Check,
    /// Build a Bethe vector three ways and compare.
    Bethe,
    /// Check the action of T_ij(z) on a Bethe vector.
    Act,
    /// Solve the Bethe equations from a grid of seeds.
    Solve,
    /// On-shell checks against exact diagonalization.
    Spectrum,
    /// Scalar-product ratio test against the gl2 reference chain.
    Scalar,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Check => Command::Check,
            Cmd::Bethe => Command::Bethe,
            Cmd::Act => Command::Act,
            Cmd::Solve => Command::Solve,
            Cmd::Spectrum => Command::Spectrum,
            Cmd::Scalar => Command::Scalar,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut config = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_USAGE as u8);
            }
        },
        None => RunConfig::default(),
    };
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    if cli.tol.is_some() {
        config.tol = cli.tol;
    }
    let outcome = run(cli.command.into(), &config);
    let mut text = serde_json::to_string_pretty(&outcome.report).expect("reports serialize");
    text.push('\n');
    if let Some(err) = outcome.report.get("error").and_then(|e| e.as_str()) {
        eprintln!("error: {err}");
    }
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(outcome.code as u8)
}
