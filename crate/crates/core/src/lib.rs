//! Orderings of vector families with bounded prefix sums.
//!
//! The crate builds and certifies orderings in three layers:
//!
//! * [`order`]: the constructive `d`-bound ordering, its drift-adjusted
//!   variant, a greedy baseline and an exact subset-DP oracle;
//! * [`partition`] and [`pipeline`]: the reduction of a general zero-sum
//!   Euclidean family to nearly-unit "w-vectors" via ball-cone groups, with a
//!   per-run certificate of every prefix;
//! * [`cap`]: spherical-cap measures and the inequality chain behind the
//!   choice of cone height.
//!
//! [`gen`] provides deterministic instance generators.

pub mod cap;
pub mod error;
pub mod gen;
pub mod order;
pub mod partition;
pub mod pipeline;
pub mod vector;

pub use error::{Error, Result};
pub use vector::{
    center_family, family_sum, gauge_norm, prefix_report, prefix_vectors, Gauge, Ordering, PrefixReport, Vector,
    VectorFamily, DEFAULT_TOL,
};
