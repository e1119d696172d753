//! Exact divisor theory on finite multigraphs and metric Q-graphs.
//!
//! The core algorithms are generic over an integer [`Scalar`]; the aliases
//! below fix it to `BigInt` for arbitrary-precision use. Hot loops (sweeps,
//! scans) instantiate the same code at `i64`.

pub mod divisor;
pub mod experiments;
pub mod fixtures;
pub mod graph;
pub mod jacobian;
pub mod linear_systems;
pub mod metric;
pub mod rank;
pub mod scalar;
pub mod specialization;

pub use graph::{parse_graph, Family, GraphError, MultiGraph, VertexOrdering};
pub use scalar::Scalar;

use num_bigint::BigInt;

/// Arbitrary-precision integer used by the default aliases.
pub type Int = BigInt;
pub type Divisor = divisor::Divisor<BigInt>;
pub type IntFunction = divisor::IntFunction<BigInt>;
pub type RankResult = rank::RankResult<BigInt>;
