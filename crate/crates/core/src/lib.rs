pub mod composition;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod linalg;
pub mod models;
pub mod rng;
pub mod solver;
pub mod task;
pub mod theory;
pub mod verify;

pub use error::{Error, Result};
