use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sairs::commands::{self, CliError};
use sairs::config::{parse_config, ScenarioConfig};
use sairs::output::write_atomic;

/// SAIRS epidemics under semi-Markov switching of the transmission rates.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override `run.horizon`.
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Write the result here instead of standard output (overrides `run.output`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override `run.trajectories`.
    #[arg(long, global = true)]
    trajectories: Option<usize>,
    /// Suppress status messages on standard error.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file.
    Validate,
    /// Reproduction numbers, margins, bounds and classification (JSON).
    Thresholds,
    /// One hybrid trajectory (CSV).
    Simulate,
    /// Monte Carlo ensemble summary (JSON).
    Ensemble,
    /// Occupation histogram of one long trajectory (JSON).
    Occupation,
    /// Recompute the published margins of an embedded scenario.
    Reproduce {
        /// 1a, 1b, 2, 3a, 3b, 3c or all.
        case: String,
    },
}

fn load(cli: &Cli) -> Result<ScenarioConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Validation("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let mut c = parse_config(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    if let Some(seed) = cli.seed {
        c.run.seed = seed;
    }
    if let Some(h) = cli.horizon {
        c.run.horizon = h;
    }
    if let Some(n) = cli.trajectories {
        c.run.trajectories = n;
    }
    c.check_run()?;
    Ok(c)
}

fn emit(cli: &Cli, default_out: Option<&str>, text: &str) -> Result<(), CliError> {
    let target = cli.out.clone().or_else(|| default_out.map(PathBuf::from));
    match target {
        Some(path) => {
            write_atomic(&path, text.as_bytes())?;
            if !cli.quiet {
                eprintln!("wrote {}", path.display());
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Command::Reproduce { case } = &cli.command {
        return match commands::cmd_reproduce(case) {
            Ok(table) => emit(cli, None, &table),
            Err(CliError::Fixture(table)) => {
                emit(cli, None, &table)?;
                Err(CliError::Fixture(format!(
                    "case {case}: published values not reproduced"
                )))
            }
            Err(e) => Err(e),
        };
    }
    let c = load(cli)?;
    let default_out = c.run.output.as_deref();
    let text = match cli.command {
        Command::Validate => commands::cmd_validate(&c),
        Command::Thresholds => commands::cmd_thresholds(&c)?,
        Command::Simulate => commands::cmd_simulate(&c)?,
        Command::Ensemble => commands::cmd_ensemble(&c)?,
        Command::Occupation => commands::cmd_occupation(&c)?,
        Command::Reproduce { .. } => unreachable!("handled above"),
    };
    let default_out = if matches!(cli.command, Command::Validate) {
        None
    } else {
        default_out
    };
    emit(cli, default_out, &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
