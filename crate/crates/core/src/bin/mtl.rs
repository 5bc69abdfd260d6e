use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use minimax_mtl::experiment::{exit_code, run_file, RunOptions};
use minimax_mtl::verify::suites::{run_suite, Suite};

/// Loss-compositional multi-task learning experiments.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment grid described by a JSON config.
    Run {
        config: PathBuf,
        /// Overrides the config's output_dir and MTL_OUTPUT_DIR.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Write per-cell solver traces under traces/.
        #[arg(long)]
        trace: bool,
    },
    /// Run a property suite: projections, composition, solver_oracle or theory.
    Verify {
        suite: String,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, output_dir, workers, trace } => {
            match run_file(&config, &RunOptions { output_dir, workers, trace }) {
                Ok(out) => {
                    println!("{} rows written to {}", out.rows.len(), out.output_dir.join("results.csv").display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code(&e) as u8)
                }
            }
        }
        Command::Verify { suite, workers } => {
            let suite: Suite = match suite.parse() {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(n) = workers {
                if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
                    eprintln!("error: cannot start {n} workers");
                    return ExitCode::from(2);
                }
            }
            let report = run_suite(suite);
            println!("{report}");
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
