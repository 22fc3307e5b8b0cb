use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use equihybrid_cli::commands::{cmd_bench, cmd_run, cmd_validate};

/// Parallel hybrid extragradient solvers for common solutions of equilibrium
/// and fixed-point problems.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem; prints a JSON summary.
    Run {
        config: PathBuf,
        /// Trace CSV path (overrides [output] trace).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Summary JSON path (overrides [output] summary).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Compare one-worker and multi-worker solver times per tolerance.
    Bench {
        config: PathBuf,
        /// Worker counts to compare against one worker, e.g. 2,4.
        #[arg(long, value_delimiter = ',')]
        workers: Option<Vec<usize>>,
        /// Report CSV path (overrides [output] report); text goes to the same
        /// path with a .txt extension.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Sample the problem's assumptions; prints a JSON report.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, trace, summary } => cmd_run(&config, trace, summary),
        Command::Bench {
            config,
            workers,
            report,
        } => cmd_bench(&config, workers, report),
        Command::Validate { config } => cmd_validate(&config),
    };
    match outcome {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status().code())
        }
    }
}
