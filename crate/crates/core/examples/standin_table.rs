//! Writes the synthetic conjoint-ratings table bundled as
//! `data/computer_standin.csv`.
//!
//! ```text
//! cargo run --example standin_table -- [path] [seed]
//! ```

use minimax_mtl::data::{synthetic_ratings, synthetic_ratings_csv, RatingsSpec};

fn main() -> minimax_mtl::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "crates/core/data/computer_standin.csv".into());
    let seed = args.next().map_or(0, |s| s.parse().expect("seed must be an integer"));
    let spec = RatingsSpec { seed, ..RatingsSpec::default() };
    std::fs::write(&path, synthetic_ratings_csv(&spec)?)?;

    let table = synthetic_ratings(&spec)?;
    let ratings: Vec<f64> = table.tasks.iter().flat_map(|t| t.rows.iter().map(|r| r.target)).collect();
    let mean = ratings.iter().sum::<f64>() / ratings.len() as f64;
    println!("{path}: {} subjects x {} products, {} features", table.num_tasks(), spec.products, table.dim());
    println!("train/test per subject: {}/{}", table.tasks[0].train.len(), table.tasks[0].test.len());
    println!("mean rating {mean:.2}");
    Ok(())
}
