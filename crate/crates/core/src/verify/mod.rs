//! Self-check suites run by `mtl verify` and the acceptance tests.

pub mod oracles;
pub mod suites;
