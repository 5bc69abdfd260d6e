//! Trains a constrained shared-plus-specific model with the minimax composer,
//! writes the per-iteration trace and round-trips a checkpoint.
//!
//! ```text
//! cargo run --example solver -- [trace.csv]
//! ```

use minimax_mtl::composition::Composer;
use minimax_mtl::data::{generate_two_modes, TwoModesConfig};
use minimax_mtl::models::{EpConfig, Model, ModelConfig};
use minimax_mtl::solver::{solve, SolveConfig};
use minimax_mtl::task::LossKind;

fn main() -> minimax_mtl::Result<()> {
    let trace_path = std::env::args().nth(1).unwrap_or_else(|| "solver_trace.csv".into());
    let data = generate_two_modes(&TwoModesConfig { seed: 4, ..Default::default() }, 0)?.data;
    let config = ModelConfig::Ep(EpConfig::Constrained { tau0: 10.0, tau1: 2.0 });
    let cfg = SolveConfig { max_iters: 1000, ..Default::default() };

    for composer in [Composer::mean(), Composer::Max] {
        let (model, report) = solve(&data.train, &config, &composer, LossKind::SQUARED, &cfg)?;
        let risks = model.risk_vector(&data.train, LossKind::SQUARED)?;
        println!(
            "{:<8} {} iterations, objective {:.4}, train max {:.3} mean {:.3}, converged {}",
            composer.label(),
            report.iterations_run,
            report.best_objective,
            risks.max(),
            risks.mean(),
            report.converged
        );
        if composer == Composer::Max {
            report.write_trace_csv(trace_path.as_ref())?;
            let json = model.to_json()?;
            let restored = Model::from_json(&json)?;
            assert_eq!(restored, model);
            println!("trace written to {trace_path}; checkpoint is {} bytes and restores exactly", json.len());
        }
    }
    Ok(())
}
