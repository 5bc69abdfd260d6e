//! The two-modes environment: 50 tasks around one mean and 5 around its
//! negated double. Compares l1 and minimax on the training tasks and on
//! freshly drawn tasks.
//!
//! ```text
//! cargo run --release --example two_modes -- [sigma_task] [sigma_noise] [replicates]
//! ```

use minimax_mtl::composition::Composer;
use minimax_mtl::data::{generate_ltl_two_modes_test_tasks, generate_two_modes, TwoModesConfig};
use minimax_mtl::evaluation::{evaluate_ltl, evaluate_mtl, refine_task_blocks, MetricKind, SharedComponent};
use minimax_mtl::models::{EpConfig, ModelConfig};
use minimax_mtl::solver::{solve, SolveConfig};
use minimax_mtl::task::LossKind;

fn main() -> minimax_mtl::Result<()> {
    let args: Vec<f64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let cfg = TwoModesConfig {
        sigma_task: args.first().copied().unwrap_or(0.1),
        sigma_noise: args.get(1).copied().unwrap_or(0.5),
        ..Default::default()
    };
    let replicates = args.get(2).map_or(10, |&r| r as u64);
    let model = ModelConfig::Ep(EpConfig::Constrained { tau0: 10.0, tau1: 2.0 });
    let solver = SolveConfig::default();
    let kind = LossKind::SQUARED;

    println!("sigma_task {}, sigma_noise {}, {replicates} replicates", cfg.sigma_task, cfg.sigma_noise);
    println!("composer   MTL max   MTL mean   LTL max   LTL mean");
    for composer in [Composer::mean(), Composer::Max] {
        let mut sums = [0.0; 4];
        for rep in 0..replicates {
            let draw = generate_two_modes(&cfg, rep)?;
            let (fit, _) = solve(&draw.data.train, &model, &composer, kind, &solver)?;
            let fit = refine_task_blocks(&fit, &draw.data.train, &model, kind, &solver)?;
            let mtl = evaluate_mtl(&fit, &draw.data.test, kind, MetricKind::L2Risk)?;
            let (new_tasks, _) = generate_ltl_two_modes_test_tasks(&cfg, rep, &draw.mu, cfg.num_tasks())?;
            let shared = SharedComponent::from_model(&fit)?;
            let ltl = evaluate_ltl(&shared, &new_tasks, &model, kind, &solver, MetricKind::L2Risk)?.metrics;
            for (s, v) in sums.iter_mut().zip([mtl.max_risk, mtl.mean_risk, ltl.max_risk, ltl.mean_risk]) {
                *s += v / replicates as f64;
            }
        }
        println!(
            "{:<9} {:>8.2} {:>10.2} {:>9.2} {:>10.2}",
            composer.label(),
            sums[0],
            sums[1],
            sums[2],
            sums[3]
        );
    }
    Ok(())
}
