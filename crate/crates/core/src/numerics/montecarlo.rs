use serde::{Deserialize, Serialize};

use super::Seed;
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
}

impl McEstimate {
    /// Mean and `sd / sqrt(n)` of a finite sample.
    pub fn from_values<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let mut acc = Welford::default();
        for v in values {
            acc.push(v);
        }
        acc.estimate()
    }

    /// `|value - target| <= max(abs_tol, 3 * stderr)`.
    pub fn agrees_with(&self, target: f64, abs_tol: f64) -> bool {
        (self.value - target).abs() <= abs_tol.max(3.0 * self.stderr)
    }
}

/// Streaming mean/variance accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance (zero for fewer than two points).
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    pub fn estimate(&self) -> McEstimate {
        McEstimate {
            value: self.mean,
            stderr: self.stderr(),
            n: self.n,
        }
    }
}

/// Estimates `E[h(Y)]` for `Y ~ dist` from `n` seeded iid draws.
pub fn mc_expectation<H>(
    mut h: H,
    dist: &DistributionSpec,
    n: usize,
    seed: Seed,
) -> Result<McEstimate>
where
    H: FnMut(f64) -> f64,
{
    try_mc_expectation(|y| Ok(h(y)), dist, n, seed)
}

pub fn try_mc_expectation<H>(
    mut h: H,
    dist: &DistributionSpec,
    n: usize,
    seed: Seed,
) -> Result<McEstimate>
where
    H: FnMut(f64) -> Result<f64>,
{
    if n < 2 {
        return Err(Error::Precondition(format!(
            "Monte Carlo needs at least 2 draws, got {n}"
        )));
    }
    let mut acc = Welford::default();
    for (index, y) in dist.sampler(seed)?.take(n).enumerate() {
        let value = h(y)?;
        if !value.is_finite() {
            return Err(Error::NonFiniteDraw {
                index,
                draw: y,
                value,
            });
        }
        acc.push(value);
    }
    Ok(acc.estimate())
}
