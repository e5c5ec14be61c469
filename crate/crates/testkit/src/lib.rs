//! Test support shared by the workspace's test suites: seeded generators
//! and oracles that recompute results independently of the code they check.

pub mod eval;
pub mod gen;
pub mod oracles;

pub use gen::rng;
