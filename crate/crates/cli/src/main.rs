//! `fraxion`: solve, sweep, verify and convert fractionation problems from TOML files.

mod commands;
mod error;
mod output;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fraxion::SolverConfig;

use commands::{Format, OracleSettings, Settings, SweepParam, SweepSpec};
use error::CliError;
use output::Precision;
use problem::ProblemFile;

/// Environment override for the largest fraction count the solvers may return.
const N_CAP_VAR: &str = "FRAXION_N_CAP";

#[derive(Debug, Parser)]
#[command(name = "fraxion", version, about = "Optimal radiotherapy fractionation under the LQ model")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "human", global = true)]
    format: Format,

    /// Significant digits for printed numbers (1-17), or `full`.
    #[arg(long, default_value = "6", global = true)]
    precision: Precision,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the problem in a TOML file.
    Solve {
        #[arg(long)]
        input: PathBuf,
    },
    /// Re-solve while one parameter moves over a linear grid; prints CSV.
    Sweep {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "sweep-param", value_enum)]
        param: SweepParam,
        #[arg(long, allow_negative_numbers = true)]
        start: f64,
        #[arg(long, allow_negative_numbers = true)]
        stop: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Solve, then check the answer locally and against a brute-force grid search.
    Verify {
        #[arg(long)]
        input: PathBuf,
        /// Grid spacing for the brute-force search (Gy).
        #[arg(long, default_value_t = 1e-2)]
        oracle_step: f64,
        /// Skip the brute-force search when more fractions than this could matter.
        #[arg(long, default_value_t = 4)]
        oracle_max_n: u64,
        /// Replace the solver's protocol before checking, e.g. `1x1.0+6x6.0`.
        #[arg(long, hide = true)]
        inject_protocol: Option<String>,
    },
    /// Iso-effective uniform dose for a different fraction count.
    Bed {
        #[arg(long)]
        input: PathBuf,
    },
}

fn solver_config() -> Result<SolverConfig, CliError> {
    let mut cfg = SolverConfig::default();
    if let Ok(raw) = std::env::var(N_CAP_VAR) {
        let bad = || CliError::Validation(format!("{N_CAP_VAR} must be a positive integer, got `{raw}`"));
        let v: f64 = raw.trim().parse().map_err(|_| bad())?;
        if !(v.is_finite() && v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64) {
            return Err(bad());
        }
        cfg.n_cap = v as u64;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<commands::Output, CliError> {
    let settings = Settings {
        format: cli.format,
        precision: cli.precision,
        solver: solver_config()?,
    };
    match cli.command {
        Command::Solve { input } => commands::solve(&ProblemFile::load(&input)?, &settings),
        Command::Sweep { input, param, start, stop, steps } => {
            let spec = SweepSpec::new(param, start, stop, steps)?;
            commands::sweep(&ProblemFile::load(&input)?, &spec, &settings)
        }
        Command::Verify { input, oracle_step, oracle_max_n, inject_protocol } => {
            let oracle = OracleSettings { grid_step: oracle_step, max_n: oracle_max_n };
            commands::verify_command(&ProblemFile::load(&input)?, &oracle, inject_protocol.as_deref(), &settings)
        }
        Command::Bed { input } => commands::bed(&ProblemFile::load(&input)?, &settings),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
