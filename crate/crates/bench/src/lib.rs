//! Shared fixtures for the benchmarks.

use elicit::distributions::{sample_iid, DistributionSpec};
use elicit::Seed;

/// Seeded lognormal(0, 1) observations.
pub fn positive_sample(n: usize) -> Vec<f64> {
    let dist: DistributionSpec = "lognormal(0,1)".parse().expect("valid distribution");
    sample_iid(&dist, n, Seed(2024)).expect("sampling succeeds")
}
