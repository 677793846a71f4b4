use std::path::PathBuf;
use std::process::ExitCode;

use bps_vortex_cli::run;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bpsvortex",
    version,
    about = "Inhomogeneous BPS vacua and vortices on a truncated plane"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration; exit 0 converged, 2 not converged, 1 config error.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every cell of a parameter sweep; exit 0 iff all cells converged.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report the impurity condition; exit 0 satisfied, 3 violated.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare the planar solution with the radial solver.
    Oracle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                run::EXIT_CONFIG
            } else {
                run::EXIT_OK
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match cli.command {
        Command::Solve { config, out } => run::run_solve(&config, out.as_deref()),
        Command::Sweep { config, out } => run::run_sweep(&config, out.as_deref()),
        Command::Check { config } => run::run_check(&config),
        Command::Oracle { config, out } => run::run_oracle(&config, out.as_deref()),
    };
    ExitCode::from(code as u8)
}
