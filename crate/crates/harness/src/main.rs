use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qds_harness::output::Format;
use qds_harness::{execute, load_config, report, write_outputs, Command, RunOptions};

/// Numerical checks of quasistatic dynamical systems.
#[derive(Debug, Parser)]
#[command(name = "qds", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML experiment config; defaults to the built-in acceptance config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides every seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for tables and the manifest.
    #[arg(long, global = true, default_value = "qds-out")]
    out: PathBuf,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Convergence and genericity experiments.
    Simulate,
    /// Ulam checks and reference curves.
    Srb,
    /// Every experiment, report only.
    Verify,
    /// Correlation decay.
    Correlations,
    /// Fourth moments and the integral bound.
    Moments,
    /// The four-point expansion identity.
    IdentityCheck,
    /// Every experiment, with tables and manifest.
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Simulate => Command::Simulate,
        Cmd::Srb => Command::Srb,
        Cmd::Verify => Command::Verify,
        Cmd::Correlations => Command::Correlations,
        Cmd::Moments => Command::Moments,
        Cmd::IdentityCheck => Command::IdentityCheck,
        Cmd::All => Command::All,
    };
    if cli.threads == Some(0) {
        eprintln!("configuration error: --threads must be positive");
        return ExitCode::from(2);
    }
    let opts = RunOptions { seed: cli.seed, format: cli.format, threads: cli.threads };
    let result = load_config(cli.config.as_deref()).and_then(|(cfg, text)| {
        let run = execute(&cfg, &text, command, &opts)?;
        if command.writes_files() {
            write_outputs(&run, &cli.out)?;
        }
        Ok(run)
    });
    match result {
        Ok(run) => {
            print!("{}", report(&run));
            ExitCode::from(run.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
