use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fvroe::check::run_checks;
use fvroe::config::SolverConfig;
use fvroe::run::{convergence, format_convergence, run};
use fvroe::Error;

#[derive(Parser)]
#[command(name = "fvroe", version, about = "Finite-volume Roe solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write its snapshots.
    Run { config: PathBuf },
    /// Print L1 errors and observed orders over a list of grid sizes.
    Convergence {
        config: PathBuf,
        #[arg(value_delimiter = ',', required = true)]
        grids: Vec<usize>,
    },
    /// Run the built-in property suite.
    Check {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

fn code_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    if e.is_numerical() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run { config } => {
            let result = SolverConfig::from_file(&config).and_then(|c| run(&c));
            match result {
                Ok(summary) => {
                    println!(
                        "{} steps to t = {}, max balance defect {:.3e}",
                        summary.steps, summary.time, summary.max_balance_defect
                    );
                    for f in &summary.files {
                        println!("wrote {}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => code_for(&e),
            }
        }
        Command::Convergence { config, grids } => {
            if grids.contains(&0) {
                eprintln!("error: grid sizes must be positive");
                return ExitCode::from(1);
            }
            match SolverConfig::from_file(&config).and_then(|c| convergence(&c, &grids)) {
                Ok(rows) => {
                    print!("{}", format_convergence(&rows));
                    ExitCode::SUCCESS
                }
                Err(e) => code_for(&e),
            }
        }
        Command::Check { seed } => {
            let report = run_checks(seed);
            print!("{report}");
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
    }
}
