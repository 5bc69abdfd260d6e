//! Multiclass digits through 45 pairwise hinge-loss tasks sharing a
//! trace-norm model, decoded by round-robin voting.
//!
//! Uses generated digits unless four IDX paths are given.
//!
//! ```text
//! cargo run --release --example mnist_tournament
//! cargo run --release --example mnist_tournament -- train-images train-labels test-images test-labels
//! ```

use minimax_mtl::composition::Composer;
use minimax_mtl::data::mnist::{read_idx_images, read_idx_labels, synthetic_digits};
use minimax_mtl::data::{build_mnist_tournament, TournamentSpec};
use minimax_mtl::evaluation::multiclass_01;
use minimax_mtl::models::{AepConfig, ModelConfig};
use minimax_mtl::solver::{solve, SolveConfig};
use minimax_mtl::task::LossKind;

fn main() -> minimax_mtl::Result<()> {
    let paths: Vec<String> = std::env::args().skip(1).collect();
    let (spec, (train, train_labels), (test, test_labels)) = if paths.len() == 4 {
        let read = |i: usize| -> minimax_mtl::Result<_> {
            Ok((read_idx_images(paths[i].as_ref())?, read_idx_labels(paths[i + 1].as_ref())?))
        };
        (TournamentSpec::default(), read(0)?, read(2)?)
    } else {
        let spec = TournamentSpec { train_fraction: 0.05, pca_dim: 30, ..Default::default() };
        (spec, synthetic_digits(200, 10, 0, 0), synthetic_digits(50, 10, 0, 1))
    };

    let tournament = build_mnist_tournament(&train, &train_labels, &spec)?;
    println!(
        "{} training images kept of {}, {} pairwise tasks in {} PCA dimensions",
        tournament.retained.len(),
        train.len(),
        tournament.data.num_tasks(),
        tournament.pca.dim()
    );
    let inputs: Vec<Vec<f64>> = (0..test.len()).map(|i| tournament.pca.transform(&test.scaled(i))).collect::<Result<_, _>>()?;
    let labels: Vec<usize> = test_labels.iter().map(|&l| usize::from(l)).collect();

    let solver = SolveConfig { patience: 500, ..Default::default() };
    for radius in [1.0, 10.0] {
        let config = ModelConfig::Aep(AepConfig::Constrained { radius });
        for composer in [Composer::mean(), Composer::Max] {
            let (model, _) = solve(&tournament.data, &config, &composer, LossKind::HINGE, &solver)?;
            let error = multiclass_01(&model, &inputs, &labels, spec.n_classes)?;
            println!("radius {radius:>4}, {:<8} test error {error:.3}", composer.label());
        }
    }
    Ok(())
}
