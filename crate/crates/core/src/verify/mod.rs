//! Monte Carlo verification of consistency, strictness, identification,
//! orientation and the transformation results on concrete distributions.
//!
//! Each [`CheckConfig`] produces one [`VerificationReport`]. A check passes
//! when `|estimate - target| <= max(tol_abs, tol_rel |target|, 3 stderr)`
//! and its side conditions (dominance, strictness, orientation) hold. Errors
//! inside a check are recorded in the report rather than aborting a suite.

mod checks;
mod engine;
mod suite;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::functionals::FunctionalSpec;
use crate::identification::IdentSpec;
use crate::numerics::{Bracket, Seed};
use crate::scoring::ScoreSpec;
use crate::transforms::{Bijection, Interval};

pub use suite::{builtin_suite, load_suite, BUILTIN_SUITES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// Minimizer of the expected score equals the functional.
    Consistency,
    /// The expected score rises clear of noise away from its minimizer.
    Strictness,
    /// `E[V(t, Y)] = 0` at the functional and nowhere else on the grid.
    Identification,
    /// `E[V(t + d, Y)]` has the orientation's sign.
    Orientation,
    /// `S(g^{-1}(z), y)` is minimized at `g` of the base minimizer.
    Revelation,
    /// `S(z, g(y))` is minimized at the functional of `g(Y)`.
    Realization,
    /// The mean-variance score recovers `(E[g(Y)], Var[g(Y)])`.
    Pair,
    /// Two scores share a minimizer.
    Agreement,
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CheckKind::Consistency => "consistency",
            CheckKind::Strictness => "strictness",
            CheckKind::Identification => "identification",
            CheckKind::Orientation => "orientation",
            CheckKind::Revelation => "revelation",
            CheckKind::Realization => "realization",
            CheckKind::Pair => "pair",
            CheckKind::Agreement => "agreement",
        })
    }
}

/// Whether a check is expected to pass or (deliberately) fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    #[default]
    Pass,
    Fail,
}

/// A measurable map applied to realizations. Need not be invertible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measurable {
    Bijection(Bijection),
    Square,
    Abs,
}

impl Measurable {
    pub fn apply(&self, y: f64) -> Result<f64> {
        match self {
            Measurable::Bijection(g) => g.apply(y),
            Measurable::Square => Ok(y * y),
            Measurable::Abs => Ok(y.abs()),
        }
    }

    pub fn domain(&self) -> Interval {
        match self {
            Measurable::Bijection(g) => g.domain(),
            _ => Interval::REAL,
        }
    }
}

impl fmt::Display for Measurable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measurable::Bijection(g) => write!(f, "{g}"),
            Measurable::Square => f.write_str("square"),
            Measurable::Abs => f.write_str("abs"),
        }
    }
}

impl FromStr for Measurable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "square" => Ok(Measurable::Square),
            "abs" => Ok(Measurable::Abs),
            other => other.parse().map(Measurable::Bijection),
        }
    }
}

/// One verification task.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub name: String,
    pub kind: CheckKind,
    pub dist: DistributionSpec,
    pub score: Option<ScoreSpec>,
    /// Second score for [`CheckKind::Agreement`].
    pub score2: Option<ScoreSpec>,
    pub ident: Option<IdentSpec>,
    pub functional: Option<FunctionalSpec>,
    /// Explicit target overriding the functional.
    pub target: Option<f64>,
    pub grid: Option<Bracket>,
    pub points: usize,
    /// Variance-coordinate grid for [`CheckKind::Pair`].
    pub grid2: Option<Bracket>,
    pub n: usize,
    pub tol_abs: f64,
    pub tol_rel: f64,
    /// Bijection for revelation and pair checks.
    pub g: Option<Bijection>,
    /// Map applied to realizations in realization checks.
    pub map: Option<Measurable>,
    pub offsets: Vec<f64>,
    pub seed: Seed,
    pub expect: Expectation,
}

pub const DEFAULT_POINTS: usize = 201;
pub const DEFAULT_PAIR_POINTS: usize = 41;
pub const DEFAULT_TOL_ABS: f64 = 1e-3;
pub const DEFAULT_TOL_REL: f64 = 0.02;
pub const DEFAULT_N: usize = 1_000_000;
/// Indicator families have higher variance.
pub const DEFAULT_N_INDICATOR: usize = 4_000_000;
pub const MIN_N: usize = 10_000;

impl CheckConfig {
    /// A config with default grid size, tolerances and sample size.
    pub fn new(name: impl Into<String>, kind: CheckKind, dist: DistributionSpec) -> Self {
        CheckConfig {
            name: name.into(),
            kind,
            dist,
            score: None,
            score2: None,
            ident: None,
            functional: None,
            target: None,
            grid: None,
            points: if kind == CheckKind::Pair {
                DEFAULT_PAIR_POINTS
            } else {
                DEFAULT_POINTS
            },
            grid2: None,
            n: DEFAULT_N,
            tol_abs: DEFAULT_TOL_ABS,
            tol_rel: DEFAULT_TOL_REL,
            g: None,
            map: None,
            offsets: Vec::new(),
            seed: Seed(0),
            expect: Expectation::Pass,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_N && !self.dist.is_empirical() {
            return Err(Error::InvalidInput(format!(
                "check `{}`: n must be at least {MIN_N}, got {}",
                self.name, self.n
            )));
        }
        if !(self.tol_abs >= 0.0) || !(self.tol_rel >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "check `{}`: tolerances must be >= 0",
                self.name
            )));
        }
        let need = |present: bool, what: &str| -> Result<()> {
            if present {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!(
                    "check `{}` ({}) needs `{what}`",
                    self.name, self.kind
                )))
            }
        };
        let has_target = self.target.is_some() || self.functional.is_some();
        match self.kind {
            CheckKind::Consistency | CheckKind::Strictness => {
                need(self.score.is_some(), "score")?;
                need(self.grid.is_some(), "grid")?;
            }
            CheckKind::Identification => {
                need(self.ident.is_some(), "ident")?;
                need(has_target, "functional or target")?;
            }
            CheckKind::Orientation => {
                need(self.ident.is_some(), "ident")?;
                need(has_target, "functional or target")?;
                need(!self.offsets.is_empty(), "offsets")?;
            }
            CheckKind::Revelation => {
                need(self.score.is_some(), "score")?;
                need(self.grid.is_some(), "grid")?;
                need(self.g.is_some(), "g")?;
            }
            CheckKind::Realization => {
                need(self.score.is_some(), "score")?;
                need(self.grid.is_some(), "grid")?;
                need(self.map.is_some(), "map")?;
                need(has_target, "functional or target")?;
            }
            CheckKind::Pair => {
                need(self.score.is_some(), "score")?;
                need(self.grid.is_some(), "grid")?;
                need(self.grid2.is_some(), "grid2")?;
            }
            CheckKind::Agreement => {
                need(self.score.is_some(), "score")?;
                need(self.score2.is_some(), "score2")?;
                need(self.grid.is_some(), "grid")?;
            }
        }
        Ok(())
    }
}

/// A scalar or pair value in a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReportValue {
    Scalar(f64),
    Pair([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub kind: CheckKind,
    pub pass: bool,
    pub expect: Expectation,
    pub estimate: Option<ReportValue>,
    pub target: Option<ReportValue>,
    pub stderr: Option<ReportValue>,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub seed: u64,
    /// Wall time in milliseconds.
    pub ms: Option<f64>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    /// True when the outcome matches the expectation.
    pub fn as_expected(&self) -> bool {
        self.pass == (self.expect == Expectation::Pass)
    }

    pub fn estimate_scalar(&self) -> Option<f64> {
        match self.estimate {
            Some(ReportValue::Scalar(v)) => Some(v),
            _ => None,
        }
    }

    pub fn stderr_scalar(&self) -> Option<f64> {
        match self.stderr {
            Some(ReportValue::Scalar(v)) => Some(v),
            _ => None,
        }
    }
}

/// `|estimate - target| <= max(tol_abs, tol_rel |target|, 3 stderr)`.
pub fn within_tolerance(
    estimate: f64,
    target: f64,
    stderr: f64,
    tol_abs: f64,
    tol_rel: f64,
) -> bool {
    (estimate - target).abs() <= tol_abs.max(tol_rel * target.abs()).max(3.0 * stderr)
}

/// Runs one check, turning errors into a failed report.
pub fn run_check(cfg: &CheckConfig) -> VerificationReport {
    let start = Instant::now();
    let mut report = VerificationReport {
        check: cfg.name.clone(),
        kind: cfg.kind,
        pass: false,
        expect: cfg.expect,
        estimate: None,
        target: None,
        stderr: None,
        tol_abs: cfg.tol_abs,
        tol_rel: cfg.tol_rel,
        seed: cfg.seed.value(),
        ms: None,
        notes: Vec::new(),
    };
    if let Err(e) = cfg.validate().and_then(|_| checks::run(cfg, &mut report)) {
        report.pass = false;
        report.notes.push(format!("error: {e}"));
    }
    report.ms = Some(start.elapsed().as_secs_f64() * 1e3);
    report
}

/// Runs checks on `parallelism` threads; output order equals input order.
pub fn run_suite(configs: &[CheckConfig], parallelism: usize) -> Result<Vec<VerificationReport>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::Precondition(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(|| configs.par_iter().map(run_check).collect()))
}

/// One row of an expected-score curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub z: f64,
    pub escore: f64,
    pub stderr: f64,
}

/// `E[S(z, Y)]` at `points` equally spaced `z` in `grid`, every `z` evaluated
/// on the same `n` draws (the support itself for empirical laws).
pub fn score_curve(
    score: &ScoreSpec,
    dist: &DistributionSpec,
    grid: Bracket,
    points: usize,
    n: usize,
    seed: Seed,
) -> Result<Vec<CurvePoint>> {
    if score.is_pair() {
        return Err(Error::Precondition(format!(
            "no scalar curve for the pair score {score}"
        )));
    }
    let (z, zc) = engine::prepare_grid(score, grid, points)?;
    let (raw, exact) = dist.expectation_points(n, seed.derive(0))?;
    let ys = raw
        .iter()
        .enumerate()
        .map(|(i, &y)| score.prepare_y(y).map_err(|e| e.at_index(i)))
        .collect::<Result<Vec<_>>>()?;
    let curve = engine::grid_curve(&z, &zc, None, &engine::Points { ys, exact }, |a, b| {
        score.core(a, b)
    });
    Ok((0..z.len())
        .map(|j| CurvePoint {
            z: z[j],
            escore: curve.mean[j],
            stderr: curve.se[j],
        })
        .collect())
}
