//! Loads a ratings table through a column schema and runs task-level
//! cross-validation with the trace-norm model: train on most subjects, adapt
//! to the held-out ones inside the learned subspace.
//!
//! ```text
//! cargo run --release --example task_table -- [table.csv] [radius]
//! ```

use std::path::PathBuf;

use minimax_mtl::composition::Composer;
use minimax_mtl::data::{load_task_table, RatingsSpec};
use minimax_mtl::evaluation::{evaluate_ltl, task_cv, MetricKind, SharedComponent};
use minimax_mtl::models::{AepConfig, ModelConfig};
use minimax_mtl::solver::{solve, SolveConfig};
use minimax_mtl::task::LossKind;

fn main() -> minimax_mtl::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/computer_standin.csv"));
    let radius: f64 = args.next().map_or(50.0, |r| r.parse().expect("radius"));

    // the bundled table uses the stand-in layout; other exports need their own schema
    let spec = RatingsSpec::default();
    let table = load_task_table(&path, &spec.schema(), &spec.holdout())?;
    let data = table.to_split_dataset()?;
    println!(
        "{} subjects, {} features, {}/{} ratings per subject",
        table.num_tasks(),
        table.dim(),
        table.tasks[0].train.len(),
        table.tasks[0].test.len()
    );

    let config = ModelConfig::Aep(AepConfig::Constrained { radius });
    let solver = SolveConfig { max_iters: 500, ..Default::default() };
    for composer in [Composer::mean(), Composer::Max] {
        let cv = task_cv(&data, 5, 0, |train, held_out| {
            let (model, _) = solve(&train.train, &config, &composer, LossKind::SQUARED, &solver)?;
            let shared = SharedComponent::from_model(&model)?;
            Ok(evaluate_ltl(&shared, held_out, &config, LossKind::SQUARED, &solver, MetricKind::Rmse)?.metrics)
        })?;
        println!(
            "{:<8} new-subject RMSE: max {:.3} +- {:.3}, mean {:.3} +- {:.3}",
            composer.label(),
            cv.max_mean,
            cv.max_std,
            cv.mean_mean,
            cv.mean_std
        );
    }
    Ok(())
}
