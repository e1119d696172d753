//! Seeded random instances and conjecture sweeps persisted as JSONL.

mod random;
mod sweeps;

pub use random::{random_divisor, random_multigraph, random_multigraph_with, rng};
pub use sweeps::*;
