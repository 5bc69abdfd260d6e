//! How each composer turns a vector of per-task risks into one objective,
//! and how alpha moves alpha-minimax between the mean and the maximum.
//!
//! ```text
//! cargo run --example composers
//! ```

use minimax_mtl::composition::{default_alpha, inner_minimize_b, Composer};
use minimax_mtl::task::RiskVector;

fn main() -> minimax_mtl::Result<()> {
    let risks = RiskVector::new(vec![0.2, 0.4, 0.4, 1.0, 3.0])?;
    let t = risks.len() as f64;
    println!("risks {:?}", risks.values());

    for c in [Composer::mean(), Composer::weighted(vec![0.1, 0.1, 0.1, 0.2, 0.5])?, Composer::L2, Composer::Max] {
        println!("{:<22} value {:.4}  subgradient {:?}", c.label(), c.compose(&risks)?, c.subgradient(&risks)?);
    }

    println!("\n alpha      b*   value   value/max  (T/alpha)*mean");
    for alpha in [0.3, 1.0, 2.0, 3.0, 4.0, 5.0, 8.0] {
        let sol = inner_minimize_b(alpha, &risks)?;
        println!(
            "{alpha:>6.1} {:>7.3} {:>7.4} {:>11.4} {:>15.4}",
            sol.b_star,
            sol.value,
            sol.value / risks.max(),
            t / alpha * risks.mean()
        );
    }

    println!("\nalpha from a tail level: the level-th share of tasks sits above b*");
    for level in [0.1, 0.2, 0.5] {
        let alpha = default_alpha(risks.len(), level)?;
        let sol = inner_minimize_b(alpha, &risks)?;
        let above = sol.xi.iter().filter(|&&x| x > 0.0).count();
        println!("level {level}: alpha {alpha:.3}, b* {:.3}, {above} tasks above", sol.b_star);
    }
    Ok(())
}
