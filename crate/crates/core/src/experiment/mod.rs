//! Batch experiments: a JSON config names a data source, a model family, a
//! set of composers and a capacity grid; the runner trains and evaluates
//! every grid cell and writes `results.csv` and `manifest.json`.

pub mod config;
pub mod runner;

pub use config::{ComposerSpec, ExperimentConfig, ExperimentKind};
pub use runner::{exit_code, run, run_file, ResultRow, RunOptions, RunOutput, RESULTS_HEADER};
