//! Common-random-number curve estimation shared by the checks.
//!
//! Every grid point is evaluated against the same draw set. Draws are split
//! into fixed contiguous batches; batch sums are computed in parallel and
//! combined in batch order, so results do not depend on thread count. The
//! batches double as replicates for standard errors of minimizers.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{nelder_mead, try_minimize1d, Bracket, SimplexOptions};
use crate::scoring::ScoreSpec;

pub(crate) const BATCHES: usize = 20;

/// Prepared realizations and whether they are an exact (equal-weight)
/// support rather than random draws.
pub(crate) struct Points {
    pub ys: Vec<f64>,
    pub exact: bool,
}

impl Points {
    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn ranges(&self) -> Vec<Range<usize>> {
        let n = self.ys.len();
        if self.exact || n < 2 * BATCHES {
            return std::iter::once(0..n).collect();
        }
        (0..BATCHES)
            .map(|k| k * n / BATCHES..(k + 1) * n / BATCHES)
            .collect()
    }

    /// `mean f(y)` with batch sums in parallel.
    pub fn mean<F>(&self, f: F) -> f64
    where
        F: Fn(f64) -> f64 + Sync,
    {
        let sums: Vec<f64> = self
            .ranges()
            .into_par_iter()
            .map(|r| self.ys[r].iter().map(|&y| f(y)).sum::<f64>())
            .collect();
        sums.iter().sum::<f64>() / self.len() as f64
    }

    /// Mean and standard error of `f(y)` (zero error for exact points).
    pub fn mean_se<F>(&self, f: F) -> (f64, f64)
    where
        F: Fn(f64) -> f64 + Sync,
    {
        let parts: Vec<(f64, f64)> = self
            .ranges()
            .into_par_iter()
            .map(|r| {
                self.ys[r].iter().fold((0.0, 0.0), |(s, q), &y| {
                    let v = f(y);
                    (s + v, q + v * v)
                })
            })
            .collect();
        let (s, q) = parts
            .iter()
            .fold((0.0, 0.0), |(a, b), &(s, q)| (a + s, b + q));
        moments(s, q, self.len(), self.exact)
    }
}

fn moments(sum: f64, sumsq: f64, n: usize, exact: bool) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    if exact || n < 2 {
        return (mean, 0.0);
    }
    let var = ((sumsq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (mean, (var / nf).sqrt())
}

/// Expected values of `f(z_j, y)` (minus `f(reference, y)`) over a grid.
pub(crate) struct Curve {
    pub z: Vec<f64>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    /// Per-batch means, `[batch][grid point]`.
    pub batch_mean: Vec<Vec<f64>>,
}

impl Curve {
    pub fn argmin(values: &[f64]) -> usize {
        values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) },
            )
            .0
    }

    pub fn spacing(&self) -> f64 {
        if self.z.len() < 2 {
            0.0
        } else {
            (self.z[self.z.len() - 1] - self.z[0]).abs() / (self.z.len() - 1) as f64
        }
    }
}

/// Grid curve of `f(zc_j, y) - f(reference, y)`, with the draw loop outermost.
pub(crate) fn grid_curve<F>(
    z: &[f64],
    zc: &[f64],
    reference: Option<f64>,
    pts: &Points,
    f: F,
) -> Curve
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let m = zc.len();
    let ranges = pts.ranges();
    let per_batch: Vec<(Vec<f64>, Vec<f64>)> = ranges
        .par_iter()
        .map(|r| {
            let mut sum = vec![0.0; m];
            let mut sq = vec![0.0; m];
            for &y in &pts.ys[r.clone()] {
                let base = reference.map_or(0.0, |t| f(t, y));
                for j in 0..m {
                    let d = f(zc[j], y) - base;
                    sum[j] += d;
                    sq[j] += d * d;
                }
            }
            (sum, sq)
        })
        .collect();
    let mut mean = vec![0.0; m];
    let mut se = vec![0.0; m];
    for j in 0..m {
        let (s, q) = per_batch
            .iter()
            .fold((0.0, 0.0), |(a, b), (s, q)| (a + s[j], b + q[j]));
        (mean[j], se[j]) = moments(s, q, pts.len(), pts.exact);
    }
    let batch_mean = per_batch
        .iter()
        .zip(&ranges)
        .map(|((s, _), r)| s.iter().map(|v| v / r.len() as f64).collect())
        .collect();
    Curve {
        z: z.to_vec(),
        mean,
        se,
        batch_mean,
    }
}

/// Minimizer of the expected score over a grid, polished by Brent's method.
pub(crate) struct Located {
    pub z: f64,
    /// Expected score at `z`.
    pub value: f64,
    /// Standard error of `z` from the batch replicates (0 for exact points).
    pub stderr: f64,
    pub curve: Curve,
}

pub(crate) fn prepare_grid(
    score: &ScoreSpec,
    grid: Bracket,
    points: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if points < 3 {
        return Err(Error::InvalidInput(format!(
            "grid needs at least 3 points, got {points}"
        )));
    }
    let z = grid.linspace(points);
    let zc = z
        .iter()
        .map(|&v| score.prepare_z(v))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| {
            Error::InvalidInput(format!(
                "grid [{}, {}] is not admissible: {e}",
                grid.lo(),
                grid.hi()
            ))
        })?;
    Ok((z, zc))
}

fn brent_on<F>(
    score: &ScoreSpec,
    ys: &[f64],
    lo: f64,
    hi: f64,
    tol: f64,
    sum: F,
) -> Result<(f64, f64)>
where
    F: Fn(&[f64], f64) -> f64,
{
    let n = ys.len() as f64;
    let objective = |z: f64| -> Result<f64> {
        let zc = score.prepare_z(z)?;
        Ok(sum(ys, zc) / n)
    };
    let m = try_minimize1d(objective, Bracket::new(lo, hi)?, tol)?;
    Ok((m.x, m.value))
}

/// Minimizer of `mean S(z, Y)` on `grid`; `reference` is the prediction the
/// curve is measured against.
pub(crate) fn locate(
    score: &ScoreSpec,
    grid: Bracket,
    points: usize,
    pts: &Points,
    reference: Option<f64>,
) -> Result<Located> {
    let (z, zc) = prepare_grid(score, grid, points)?;
    let zref = reference
        .and_then(|t| score.prepare_z(t).ok())
        .unwrap_or(zc[zc.len() / 2]);
    let curve = grid_curve(&z, &zc, Some(zref), pts, |a, b| score.core(a, b));
    let last = z.len() - 1;
    let best = Curve::argmin(&curve.mean);
    if best == 0 || best == last {
        return Err(Error::BracketEdge {
            at: z[best],
            lo: grid.lo(),
            hi: grid.hi(),
        });
    }
    let tol = 1e-6 * curve.spacing();
    let sum = |ys: &[f64], zc: f64| ys.iter().map(|&y| score.core(zc, y)).sum::<f64>();
    let full = |zc: f64| -> f64 {
        let sums: Vec<f64> = pts
            .ranges()
            .into_par_iter()
            .map(|r| sum(&pts.ys[r], zc))
            .collect();
        sums.iter().sum::<f64>()
    };
    let n = pts.len() as f64;
    let objective = |t: f64| -> Result<f64> { Ok(full(score.prepare_z(t)?) / n) };
    let min = try_minimize1d(objective, Bracket::new(z[best - 1], z[best + 1])?, tol)?;

    let ranges = pts.ranges();
    let stderr = if ranges.len() > 1 {
        let replicates: Vec<f64> = ranges
            .par_iter()
            .zip(curve.batch_mean.par_iter())
            .map(|(r, means)| {
                let j = Curve::argmin(means).clamp(1, last - 1);
                brent_on(score, &pts.ys[r.clone()], z[j - 1], z[j + 1], tol, sum).map(|(x, _)| x)
            })
            .collect::<Result<_>>()?;
        replicate_se(&replicates)
    } else {
        0.0
    };
    Ok(Located {
        z: min.x,
        value: min.value,
        stderr,
        curve,
    })
}

/// `sd / sqrt(K)` of `K` batch replicates.
pub(crate) fn replicate_se(values: &[f64]) -> f64 {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (var / k).sqrt()
}

// polish in (x1, log x2)
const PAIR_SIMPLEX: SimplexOptions = SimplexOptions {
    initial_step: 0.02,
    f_tol: 1e-14,
    x_tol: 1e-9,
    max_iter: 4000,
};

/// Minimizer of the mean-variance score over a 2-D grid.
pub(crate) struct LocatedPair {
    pub x: [f64; 2],
    pub stderr: [f64; 2],
}

pub(crate) fn locate_pair(
    score: &ScoreSpec,
    grid1: Bracket,
    grid2: Bracket,
    points: usize,
    pts: &Points,
) -> Result<LocatedPair> {
    if points < 3 {
        return Err(Error::InvalidInput(format!(
            "grid needs at least 3 points, got {points}"
        )));
    }
    if !(grid2.lo() > 0.0) {
        return Err(Error::InvalidInput(format!(
            "variance grid must be positive, got [{}, {}]",
            grid2.lo(),
            grid2.hi()
        )));
    }
    let x1 = grid1.linspace(points);
    let x2 = grid2.linspace(points);
    let m = points * points;
    let sums: Vec<Vec<f64>> = pts
        .ranges()
        .into_par_iter()
        .map(|r| {
            let mut acc = vec![0.0; m];
            for &y in &pts.ys[r] {
                for (i, &a) in x1.iter().enumerate() {
                    for (j, &b) in x2.iter().enumerate() {
                        acc[i * points + j] += score.core_pair(a, b, y);
                    }
                }
            }
            acc
        })
        .collect();
    let total: Vec<f64> = (0..m).map(|c| sums.iter().map(|s| s[c]).sum()).collect();
    let best = Curve::argmin(&total);
    let (bi, bj) = (best / points, best % points);
    if bi == 0 || bi == points - 1 || bj == 0 || bj == points - 1 {
        return Err(Error::BracketEdge {
            at: if bi == 0 || bi == points - 1 {
                x1[bi]
            } else {
                x2[bj]
            },
            lo: if bi == 0 || bi == points - 1 {
                grid1.lo()
            } else {
                grid2.lo()
            },
            hi: if bi == 0 || bi == points - 1 {
                grid1.hi()
            } else {
                grid2.hi()
            },
        });
    }
    let polish = |ys: &[f64], start: [f64; 2]| -> Result<[f64; 2]> {
        let n = ys.len() as f64;
        let f = |p: &[f64]| -> Result<f64> {
            let v = p[1].exp();
            Ok(ys.iter().map(|&y| score.core_pair(p[0], v, y)).sum::<f64>() / n)
        };
        let r = nelder_mead(f, &[start[0], start[1].ln()], PAIR_SIMPLEX)?;
        Ok([r.x[0], r.x[1].exp()])
    };
    // full-sample polish, evaluated batch-parallel
    let ranges = pts.ranges();
    let n = pts.len() as f64;
    let full = |p: &[f64]| -> Result<f64> {
        let v = p[1].exp();
        let parts: Vec<f64> = ranges
            .par_iter()
            .map(|r| {
                pts.ys[r.clone()]
                    .iter()
                    .map(|&y| score.core_pair(p[0], v, y))
                    .sum::<f64>()
            })
            .collect();
        Ok(parts.iter().sum::<f64>() / n)
    };
    let r = nelder_mead(full, &[x1[bi], x2[bj].ln()], PAIR_SIMPLEX)?;
    let x = [r.x[0], r.x[1].exp()];
    let stderr = if ranges.len() > 1 {
        let reps: Vec<[f64; 2]> = ranges
            .par_iter()
            .map(|r| polish(&pts.ys[r.clone()], x))
            .collect::<Result<_>>()?;
        let a: Vec<f64> = reps.iter().map(|p| p[0]).collect();
        let b: Vec<f64> = reps.iter().map(|p| p[1]).collect();
        [replicate_se(&a), replicate_se(&b)]
    } else {
        [0.0, 0.0]
    };
    Ok(LocatedPair { x, stderr })
}
