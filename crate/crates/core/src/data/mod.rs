//! Dataset construction: synthetic two-modes tasks, tabular task files and
//! the MNIST tournament.

pub mod mnist;
pub mod ratings;
pub mod table;
pub mod two_modes;

pub use mnist::{build_mnist_tournament, tournament_decode, IdxImages, MnistTournament, TournamentSpec};
pub use ratings::{synthetic_ratings, synthetic_ratings_csv, RatingsSpec};
pub use table::{load_task_table, HoldoutRule, TableSchema, TaskTable};
pub use two_modes::{generate_ltl_two_modes_test_tasks, generate_two_modes, TwoModes, TwoModesConfig};
