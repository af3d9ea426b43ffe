//! Target functionals `T(F)`: mean, quantile, expectile, their
//! `g`-transformed versions and the (mean, variance) pair of `g(Y)`.
//!
//! The analytic path from [`crate::distributions`] is preferred; otherwise
//! values are estimated from seeded draws. Functionals of the law of `g(Y)`
//! are always computed by transforming draws of `Y`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::{analytic_functional, sorted_quantile_interval, DistributionSpec};
use crate::error::{Error, Result};
use crate::numerics::{root1d, Bracket, Seed, Welford};
use crate::transforms::Bijection;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunctionalSpec {
    Mean,
    Quantile {
        tau: f64,
    },
    Expectile {
        tau: f64,
    },
    /// `g^{-1}(E[g(Y)])`.
    GMean {
        g: Bijection,
    },
    /// `g^{-1}` of the `tau`-expectile of `g(Y)`.
    GExpectile {
        tau: f64,
        g: Bijection,
    },
    /// `(E[g(Y)], Var[g(Y)])`.
    MvPair {
        g: Bijection,
    },
}

/// A scalar, a set-valued (interval) or a pair-valued functional value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionalValue {
    Scalar(f64),
    Interval { lo: f64, hi: f64 },
    Pair(f64, f64),
}

impl FunctionalValue {
    pub fn interval(lo: f64, hi: f64) -> Self {
        FunctionalValue::Interval { lo, hi }
    }

    /// Scalar representative: the value itself, or the lower endpoint of an
    /// interval. `None` for pairs.
    pub fn point(&self) -> Option<f64> {
        match *self {
            FunctionalValue::Scalar(v) => Some(v),
            FunctionalValue::Interval { lo, .. } => Some(lo),
            FunctionalValue::Pair(..) => None,
        }
    }

    pub fn is_set_valued(&self) -> bool {
        matches!(self, FunctionalValue::Interval { lo, hi } if lo < hi)
    }

    /// Distance from `z` to the value (zero anywhere inside an interval).
    pub fn distance(&self, z: f64) -> Option<f64> {
        match *self {
            FunctionalValue::Scalar(v) => Some((z - v).abs()),
            FunctionalValue::Interval { lo, hi } => Some((lo - z).max(z - hi).max(0.0)),
            FunctionalValue::Pair(..) => None,
        }
    }
}

/// A functional value with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalEstimate {
    pub value: FunctionalValue,
    /// Standard error of the (first) coordinate; zero for closed forms.
    pub stderr: f64,
    /// Standard error of the second coordinate of a pair.
    pub stderr2: f64,
    pub analytic: bool,
}

impl FunctionalEstimate {
    pub fn exact(value: FunctionalValue) -> Self {
        FunctionalEstimate {
            value,
            stderr: 0.0,
            stderr2: 0.0,
            analytic: true,
        }
    }
}

impl FunctionalSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FunctionalSpec::Quantile { tau }
            | FunctionalSpec::Expectile { tau }
            | FunctionalSpec::GExpectile { tau, .. } => check_tau(tau),
            _ => Ok(()),
        }
    }

    /// The transformation applied to realizations, if any.
    pub fn transform(&self) -> Option<Bijection> {
        match *self {
            FunctionalSpec::GMean { g }
            | FunctionalSpec::GExpectile { g, .. }
            | FunctionalSpec::MvPair { g } => Some(g),
            _ => None,
        }
    }

    pub fn is_pair(&self) -> bool {
        matches!(self, FunctionalSpec::MvPair { .. })
    }
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::parameter(
            "tau",
            format!("requires 0 < tau < 1, got {tau}"),
        ))
    }
}

/// `kappa_{a,b}(t) = max(min(t, b), -a)`.
pub fn capping(a: f64, b: f64, t: f64) -> f64 {
    if t <= -a {
        -a
    } else if t <= b {
        t
    } else {
        b
    }
}

/// `T(F)` by the closed form when available, else from `n` seeded draws.
pub fn functional_value(
    spec: &FunctionalSpec,
    dist: &DistributionSpec,
    n: usize,
    seed: Seed,
) -> Result<FunctionalEstimate> {
    spec.validate()?;
    if let Some(value) = analytic_functional(dist, spec)? {
        return Ok(FunctionalEstimate::exact(value));
    }
    if n < 2 {
        return Err(Error::Precondition(format!(
            "Monte Carlo needs at least 2 draws, got {n}"
        )));
    }
    let draws: Vec<f64> = dist.sampler(seed)?.take(n).collect();
    functional_from_sample(spec, &draws)
}

/// `T` of the empirical law of `draws`, with asymptotic standard errors.
pub fn functional_from_sample(spec: &FunctionalSpec, draws: &[f64]) -> Result<FunctionalEstimate> {
    spec.validate()?;
    if draws.len() < 2 {
        return Err(Error::Precondition("need at least 2 draws".into()));
    }
    let estimate = match *spec {
        FunctionalSpec::Mean => mean_estimate(&Bijection::Identity, draws)?,
        FunctionalSpec::GMean { g } => mean_estimate(&g, draws)?,
        FunctionalSpec::Quantile { tau } => quantile_estimate(tau, draws),
        FunctionalSpec::Expectile { tau } => expectile_estimate(tau, &Bijection::Identity, draws)?,
        FunctionalSpec::GExpectile { tau, g } => expectile_estimate(tau, &g, draws)?,
        FunctionalSpec::MvPair { g } => {
            let values = transformed(&g, draws)?;
            let mut acc = Welford::default();
            values.iter().for_each(|&v| acc.push(v));
            let n = values.len() as f64;
            let mean = acc.mean();
            let var = acc.variance() * (n - 1.0) / n;
            let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
            FunctionalEstimate {
                value: FunctionalValue::Pair(mean, var),
                stderr: acc.stderr(),
                stderr2: ((m4 - var * var).max(0.0) / n).sqrt(),
                analytic: false,
            }
        }
    };
    Ok(estimate)
}

fn transformed(g: &Bijection, draws: &[f64]) -> Result<Vec<f64>> {
    draws
        .iter()
        .enumerate()
        .map(|(i, &y)| g.apply(y).map_err(|e| e.at_index(i)))
        .collect()
}

/// `g^{-1}(m)` and the delta-method standard error `se / |g'(g^{-1}(m))|`.
fn back_transform(g: &Bijection, m: f64, se: f64) -> Result<(f64, f64)> {
    let t = g.invert(m)?;
    let slope = g.deriv(t).map(f64::abs).unwrap_or(f64::NAN);
    let se_t = if slope > 0.0 {
        se / slope
    } else {
        f64::INFINITY
    };
    Ok((t, se_t))
}

fn mean_estimate(g: &Bijection, draws: &[f64]) -> Result<FunctionalEstimate> {
    let mut acc = Welford::default();
    for (i, &y) in draws.iter().enumerate() {
        acc.push(g.apply(y).map_err(|e| e.at_index(i))?);
    }
    let (value, stderr) = back_transform(g, acc.mean(), acc.stderr())?;
    Ok(FunctionalEstimate {
        value: FunctionalValue::Scalar(value),
        stderr,
        stderr2: 0.0,
        analytic: false,
    })
}

fn quantile_estimate(tau: f64, draws: &[f64]) -> FunctionalEstimate {
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = sorted_quantile_interval(&sorted, tau);
    // distribution-free: half the spread of the order statistics one
    // binomial standard deviation either side of n*tau
    let n = sorted.len();
    let spread = (n as f64 * tau * (1.0 - tau)).sqrt().ceil() as usize;
    let k = ((n as f64 * tau).ceil() as usize).clamp(1, n) - 1;
    let below = sorted[k.saturating_sub(spread)];
    let above = sorted[(k + spread).min(n - 1)];
    FunctionalEstimate {
        value: FunctionalValue::interval(lo, hi),
        stderr: 0.5 * (above - below),
        stderr2: 0.0,
        analytic: false,
    }
}

/// Root of the empirical `tau E[(w - z)+] - (1 - tau) E[(z - w)+]`.
pub fn sample_expectile(tau: f64, values: &[f64]) -> Result<f64> {
    check_tau(tau)?;
    if values.is_empty() {
        return Err(Error::EmptyData);
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if lo == hi {
        return Ok(lo);
    }
    let pad = 0.01 * (hi - lo);
    let n = values.len() as f64;
    let identify = |z: f64| {
        let (up, down) = values.iter().fold((0.0, 0.0), |(u, d), &w| {
            if w > z {
                (u + (w - z), d)
            } else {
                (u, d + (z - w))
            }
        });
        (tau * up - (1.0 - tau) * down) / n
    };
    // strictly decreasing in z, so the root is unique
    root1d(
        identify,
        Bracket::new(lo - pad, hi + pad)?,
        1e-12 * (hi - lo).max(lo.abs().max(hi.abs())),
    )
}

fn expectile_estimate(tau: f64, g: &Bijection, draws: &[f64]) -> Result<FunctionalEstimate> {
    let values = transformed(g, draws)?;
    let e = sample_expectile(tau, &values)?;
    // sandwich variance: Var(psi) / (n D^2)
    let n = values.len() as f64;
    let mut psi = Welford::default();
    let mut slope = 0.0;
    for &w in &values {
        let weight = if w > e { tau } else { 1.0 - tau };
        psi.push(weight * (w - e));
        slope += weight;
    }
    slope /= n;
    let se = psi.stderr() / slope;
    let (value, stderr) = back_transform(g, e, se)?;
    Ok(FunctionalEstimate {
        value: FunctionalValue::Scalar(value),
        stderr,
        stderr2: 0.0,
        analytic: false,
    })
}

/// `Q^tau` of the law of `g(Y)` mapped from quantiles of `Y`:
/// `g(Q^tau(F))` for increasing `g`, `g(Q^{1-tau}(F))` for decreasing `g`.
pub fn transformed_quantile(
    dist: &DistributionSpec,
    tau: f64,
    g: &Bijection,
) -> Result<(f64, f64)> {
    check_tau(tau)?;
    dist.require_support_in(&g.domain(), format_args!("domain of {g}"))?;
    let level = if g.is_increasing() { tau } else { 1.0 - tau };
    let (lo, hi) = dist.quantile(level)?;
    let (a, b) = (g.apply(lo)?, g.apply(hi)?);
    Ok(if a <= b { (a, b) } else { (b, a) })
}

impl fmt::Display for FunctionalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionalSpec::Mean => f.write_str("mean"),
            FunctionalSpec::Quantile { tau } => write!(f, "quantile:tau={tau}"),
            FunctionalSpec::Expectile { tau } => write!(f, "expectile:tau={tau}"),
            FunctionalSpec::GMean { g } => write!(f, "gmean:g={g}"),
            FunctionalSpec::GExpectile { tau, g } => write!(f, "gexpectile:tau={tau}:g={g}"),
            FunctionalSpec::MvPair { g } => write!(f, "mvpair:g={g}"),
        }
    }
}

/// Splits `name:key=value:key=value` into the name and its key/value pairs.
pub(crate) fn split_params(s: &str) -> Result<(&str, Vec<(&str, &str)>)> {
    let mut parts = s.split(':');
    let name = parts.next().unwrap_or("").trim();
    let mut params = Vec::new();
    for part in parts {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::parse(format!("expected key=value, got `{part}` in `{s}`")))?;
        params.push((k.trim(), v.trim()));
    }
    Ok((name, params))
}

/// Looks up parameters by key, rejecting unknown keys.
pub(crate) struct Params<'a> {
    owner: &'a str,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Params<'a> {
    pub(crate) fn new(
        owner: &'a str,
        pairs: Vec<(&'a str, &'a str)>,
        allowed: &[&str],
    ) -> Result<Self> {
        if let Some((k, _)) = pairs.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(Error::parse(format!(
                "`{owner}` does not take parameter `{k}`"
            )));
        }
        Ok(Params { owner, pairs })
    }

    fn raw(&self, key: &str) -> Option<&'a str> {
        self.pairs.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    pub(crate) fn number(&self, key: &str) -> Result<f64> {
        let raw = self
            .raw(key)
            .ok_or_else(|| Error::parse(format!("`{}` requires `{key}=`", self.owner)))?;
        raw.parse()
            .map_err(|_| Error::parse(format!("`{key}={raw}` is not a number")))
    }

    pub(crate) fn get<T: FromStr<Err = Error>>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key).map(str::parse).transpose()
    }
}

impl FromStr for FunctionalSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, pairs) = split_params(s.trim())?;
        let spec = match name {
            "mean" => {
                Params::new(name, pairs, &[])?;
                FunctionalSpec::Mean
            }
            "quantile" => FunctionalSpec::Quantile {
                tau: Params::new(name, pairs, &["tau"])?.number("tau")?,
            },
            "expectile" => FunctionalSpec::Expectile {
                tau: Params::new(name, pairs, &["tau"])?.number("tau")?,
            },
            "gmean" => FunctionalSpec::GMean {
                g: Params::new(name, pairs, &["g"])?
                    .get("g")?
                    .unwrap_or(Bijection::Identity),
            },
            "gexpectile" => {
                let p = Params::new(name, pairs, &["tau", "g"])?;
                FunctionalSpec::GExpectile {
                    tau: p.number("tau")?,
                    g: p.get("g")?.unwrap_or(Bijection::Identity),
                }
            }
            "mvpair" => FunctionalSpec::MvPair {
                g: Params::new(name, pairs, &["g"])?
                    .get("g")?
                    .unwrap_or(Bijection::Identity),
            },
            other => return Err(Error::parse(format!("unknown functional `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl Serialize for FunctionalSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FunctionalSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
