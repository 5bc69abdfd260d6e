//! Runs an experiment grid from code rather than the command line, then
//! reads the aggregated rows back.
//!
//! ```text
//! cargo run --release --example experiment_api -- [output_dir]
//! ```

use minimax_mtl::experiment::{run, ExperimentConfig, RunOptions};

fn main() -> minimax_mtl::Result<()> {
    let output_dir = std::env::args().nth(1).unwrap_or_else(|| "results/experiment_api".into());
    let config = ExperimentConfig::from_json(
        r#"{
            "experiment": "two_modes",
            "tau0": 10.0,
            "composers": ["l1", "minimax", {"alpha_minimax": 0.1}],
            "capacity_grid": [1.0, 2.0],
            "replicates": 5,
            "seed": 7,
            "two_modes": {"data": {"sigma_task": 0.1, "sigma_noise": 0.5}}
        }"#,
    )?;
    let opts = RunOptions { output_dir: Some(output_dir.into()), workers: None, trace: true };
    let out = run(&config, ".".as_ref(), &opts)?;

    println!("{} rows in {}", out.rows.len(), out.output_dir.join("results.csv").display());
    println!("composer            tau1   LTL max  (std)   LTL mean");
    for composer in &config.composers {
        for &cap in &config.capacity_grid {
            let row = out.aggregate(&composer.label(), cap, "ltl_l2_risk").expect("aggregate row");
            println!(
                "{:<18} {cap:>5} {:>9.2} ({:>5.2}) {:>9.2}",
                composer.label(),
                row.max_value,
                row.std.unwrap_or(0.0),
                row.mean_value
            );
        }
    }
    Ok(())
}
