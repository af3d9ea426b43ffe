//! Deterministic low-level numerics shared by the rest of the crate.
//!
//! Everything here is derivative-free and bracketed: the objectives built from
//! pinball and piecewise scores have kinks, so neither the minimizer nor the
//! root finder assumes smoothness.

mod diff;
mod minimize;
mod montecarlo;
mod root;
mod seed;
mod simplex;

pub use diff::{central_diff, default_step};
pub use minimize::{minimize1d, try_minimize1d, Minimum};
pub use montecarlo::{mc_expectation, try_mc_expectation, McEstimate, Welford};
pub use root::{root1d, try_root1d};
pub use seed::Seed;
pub use simplex::{nelder_mead, SimplexOptions, SimplexResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!(
                "bracket endpoints must be finite, got [{lo}, {hi}]"
            )));
        }
        if lo >= hi {
            return Err(Error::InvalidInput(format!(
                "bracket requires lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Bracket { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    /// `points` equally spaced abscissae including both endpoints.
    pub fn linspace(&self, points: usize) -> Vec<f64> {
        match points {
            0 => Vec::new(),
            1 => vec![0.5 * (self.lo + self.hi)],
            _ => {
                let step = self.width() / (points - 1) as f64;
                (0..points)
                    .map(|i| {
                        if i == points - 1 {
                            self.hi
                        } else {
                            self.lo + step * i as f64
                        }
                    })
                    .collect()
            }
        }
    }
}
