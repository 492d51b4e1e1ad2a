//! Exact-arithmetic measures on integer partitions (equivalently, finite
//! abelian p-groups), their samplers, moments, and a random-matrix
//! Monte-Carlo validation layer built on Smith normal form over Z/p^k.
//!
//! Highlights:
//!
//! - [`exact`]: arbitrary-precision rationals, q-series primitives, and
//!   interval enclosures for infinite products.
//! - [`partition`]: the [`Partition`] type and constrained enumeration.
//! - [`groups`]: automorphism/subgroup/surjection counts, moments with
//!   rigorous truncation tails, and brute-force enumeration oracles.
//! - [`measures`]: the measure families behind [`MeasureSpec`], with exact
//!   masses and closed-form marginals.
//! - [`hall_littlewood`]: symmetrization-based polynomial evaluation used as
//!   an independent cross-check of the measures.
//! - [`sampler`]: seeded conjugate-column chain samplers, exact to the last
//!   bit.
//! - [`matrix`]: random matrices over Z/p^k, cokernel statistics, the
//!   random-quotient process, and total-variation comparison.
//! - [`validate`]: the deterministic identity suite.

pub mod error;
pub mod exact;

pub mod groups;
pub mod hall_littlewood;
pub mod matrix;
pub mod measures;
pub mod partition;
pub mod sampler;
pub mod validate;

pub use error::{Error, Result};
pub use exact::{IntervalRational, Rational};
pub use groups::RankBound;
pub use matrix::{CokernelSample, Ensemble, ModPKMatrix};
pub use measures::{MeasureSpec, MeasureValue};
pub use partition::Partition;
pub use sampler::{EmpiricalDistribution, PartitionSampler, RandomStream};
