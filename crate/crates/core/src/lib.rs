//! Deterministic submodular maximization.
//!
//! The randomized double greedy (unconstrained) and random greedy
//! (cardinality constraint) algorithms are derandomized by carrying an
//! explicit distribution over algorithm states and updating it with
//! extreme-point solutions of a small linear program per iteration.
//!
//! * [`usm`]: unconstrained maximization, ratio 1/2, `O(n²)` queries.
//! * [`card`]: `max f(S), |S| <= k`, ratio `(1 - 1/k)^(k-1) >= 1/e`, `O(k²n)` queries.
//! * [`tightcase`]: an instance on which [`card`] can end at `1/e + O(1/k)`.
//! * [`baselines`]: the seeded randomized algorithms, for comparison.

pub mod baselines;
pub mod card;
pub mod distribution;
pub mod error;
pub mod extreme_point;
pub mod instance;
pub mod oracle;
pub mod prng;
pub mod set;
pub mod stats;
pub mod tightcase;
pub mod usm;
pub mod verify;

pub use distribution::{Distribution, WeightedState};
pub use error::{Error, Result};
pub use oracle::{SetFunction, ValueOracle};
pub use set::ElementSet;
pub use stats::RunStats;
