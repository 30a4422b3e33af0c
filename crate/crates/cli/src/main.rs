use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lnl_cli::{check, solve, sweep, CliError, RawConfig, RunConfig, RunOptions};

#[derive(Parser)]
#[command(name = "lnl", about = "Coupled local/nonlocal variational solver")]
struct Cli {
    /// Exit with code 3 when the geometry is inadmissible.
    #[arg(long, global = true)]
    strict: bool,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check, assemble, solve and verify.
    Solve { config: PathBuf },
    /// Admissibility check only.
    Check { config: PathBuf },
    /// One solve per parameter value, summarized in summary.csv.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        /// Comma-separated values; may be empty.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        values: String,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let opts = RunOptions {
        strict: cli.strict,
        out: cli.out,
    };
    match cli.command {
        Command::Solve { config } => {
            let cfg = RunConfig::from_raw(&RawConfig::load(&config)?)?;
            print!("{}", solve(&cfg, &opts)?.write());
        }
        Command::Check { config } => {
            let cfg = RunConfig::from_raw(&RawConfig::load(&config)?)?;
            print!("{}", check(&cfg, &opts)?.write());
        }
        Command::Sweep { config, param, values } => {
            let raw = RawConfig::load(&config)?;
            let values: Vec<String> = values
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(String::from)
                .collect();
            print!("{}", sweep(&raw, &param, &values, &opts)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lnl: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
