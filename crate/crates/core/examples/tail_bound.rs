//! Checks the tail bound on a finite environment: how often a representation
//! chosen on T tasks has a new-task tail probability above log(2C/delta)/T.
//!
//! ```text
//! cargo run --release --example tail_bound -- [meta_reps]
//! ```

use minimax_mtl::theory::{bound_comparison, verify_tail_bound, FiniteEnvironment, TailBoundConfig};

fn main() -> minimax_mtl::Result<()> {
    let meta_reps = std::env::args().nth(1).map_or(200, |r| r.parse().expect("meta_reps"));
    let env = FiniteEnvironment::default();
    let cfg = TailBoundConfig { meta_reps, test_tasks: 1000, ..Default::default() };
    println!("{} representations, m = {}, gamma {}, delta {}", env.representations.len(), env.m, cfg.gamma, cfg.delta);
    println!("   T  violations  allowed  mean tail  bound    skipped");
    let mut mean_risk = 0.0;
    for t in [25, 50, 100] {
        let r = verify_tail_bound(&env, t, &cfg)?;
        mean_risk = r.mean_train_risk;
        println!(
            "{t:>4} {:>11.3} {:>8.3} {:>10.4} {:>6.4} {:>9.1}%",
            r.empirical_tail_freq,
            r.allowed_freq,
            r.mean_tail_estimate,
            r.lemma1_bound,
            100.0 * r.skip_rate
        );
    }

    println!("\ndirect bound versus Markov at mean training risk {mean_risk:.3}");
    let c = env.representations.len();
    for row in bound_comparison(c, cfg.delta, env.clip_bound, mean_risk, cfg.epsilon, &[25, 100, 400], &[1.5, 3.0])? {
        println!("T {:>4} gamma {:.1}: direct {:.4}  markov {:.4}", row.tasks, row.gamma, row.theorem1_rhs, row.markov_rhs);
    }
    Ok(())
}
