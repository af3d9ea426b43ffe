//! Distribution specifications `F` with samplers, CDFs and closed-form
//! functional values.
//!
//! Moment requirements are documented per variant but not checked: Normal,
//! Lognormal, Exponential and Uniform have all moments used by the catalog
//! (for Lognormal, `E[Y^a]` exists for every real `a`); Empirical is a finite
//! point mass and trivially has every moment.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::functionals::{FunctionalSpec, FunctionalValue};
use crate::numerics::{root1d, Bracket, Seed};
use crate::transforms::{parse_number_list, Bijection, Interval};

#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    Normal {
        mu: f64,
        sigma: f64,
    },
    /// `exp(N(mu, sigma^2))`.
    Lognormal {
        mu: f64,
        sigma: f64,
    },
    Exponential {
        rate: f64,
    },
    Uniform {
        a: f64,
        b: f64,
    },
    /// Equal-weight point masses at the given values.
    Empirical(Vec<f64>),
}

impl DistributionSpec {
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        DistributionSpec::Normal { mu, sigma }.validated()
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        DistributionSpec::Lognormal { mu, sigma }.validated()
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        DistributionSpec::Exponential { rate }.validated()
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        DistributionSpec::Uniform { a, b }.validated()
    }

    pub fn empirical(values: Vec<f64>) -> Result<Self> {
        DistributionSpec::Empirical(values).validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    /// Checks the parameter constraints of the variant.
    pub fn validate(&self) -> Result<()> {
        use DistributionSpec::*;
        let bad = |name: &str, c: &str| Err(Error::parameter(name, c.to_string()));
        match *self {
            Normal { mu, sigma } | Lognormal { mu, sigma } => {
                if !mu.is_finite() || !(sigma > 0.0) || !sigma.is_finite() {
                    return bad(self.name(), "requires finite mu and 0 < sigma < inf");
                }
            }
            Exponential { rate } => {
                if !(rate > 0.0) || !rate.is_finite() {
                    return bad("exponential", "requires 0 < rate < inf");
                }
            }
            Uniform { a, b } => {
                if !a.is_finite() || !b.is_finite() || !(a < b) {
                    return bad("uniform", "requires finite a < b");
                }
            }
            Empirical(ref values) => {
                if values.is_empty() {
                    return bad("empirical", "requires at least one value");
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return bad("empirical", "requires finite values");
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            DistributionSpec::Normal { .. } => "normal",
            DistributionSpec::Lognormal { .. } => "lognormal",
            DistributionSpec::Exponential { .. } => "exponential",
            DistributionSpec::Uniform { .. } => "uniform",
            DistributionSpec::Empirical(_) => "empirical",
        }
    }

    pub fn is_empirical(&self) -> bool {
        matches!(self, DistributionSpec::Empirical(_))
    }

    /// Smallest interval carrying all the probability mass.
    pub fn support(&self) -> Interval {
        use DistributionSpec::*;
        match self {
            Normal { .. } => Interval::REAL,
            Lognormal { .. } | Exponential { .. } => Interval::POSITIVE,
            Uniform { a, b } => Interval::open(*a, *b),
            Empirical(values) => {
                let (lo, hi) = min_max(values);
                Interval::closed(lo, hi)
            }
        }
    }

    /// Errors unless the support lies inside `domain`.
    pub fn require_support_in(&self, domain: &Interval, what: impl fmt::Display) -> Result<()> {
        if let DistributionSpec::Empirical(values) = self {
            if let Some(&v) = values.iter().find(|&&v| !domain.contains(v)) {
                return Err(Error::domain(
                    v,
                    *domain,
                    format_args!("support of {self} vs {what}"),
                ));
            }
            return Ok(());
        }
        let support = self.support();
        if domain.contains_interval(&support) {
            Ok(())
        } else {
            let witness =
                if support.lo < domain.lo || (support.lo == domain.lo && !domain.lo_closed) {
                    support.lo
                } else {
                    support.hi
                };
            Err(Error::domain(
                witness,
                *domain,
                format_args!("support {support} of {self} vs {what}"),
            ))
        }
    }

    /// Infinite iterator of iid draws.
    pub fn sampler(&self, seed: Seed) -> Result<Sampler<'_>> {
        self.validate()?;
        Ok(Sampler {
            dist: self,
            rng: seed.rng(),
        })
    }

    /// Points over which expectations are averaged: the support itself for
    /// Empirical (exact, flagged `true`), otherwise `n` seeded draws.
    pub fn expectation_points(&self, n: usize, seed: Seed) -> Result<(Vec<f64>, bool)> {
        match self {
            DistributionSpec::Empirical(values) => Ok((values.clone(), true)),
            _ => {
                if n < 2 {
                    return Err(Error::Precondition(format!(
                        "Monte Carlo needs at least 2 draws, got {n}"
                    )));
                }
                Ok((self.sampler(seed)?.take(n).collect(), false))
            }
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        use DistributionSpec::*;
        match *self {
            Normal { mu, sigma } => std_normal_cdf((y - mu) / sigma),
            Lognormal { mu, sigma } => {
                if y <= 0.0 {
                    0.0
                } else {
                    std_normal_cdf((y.ln() - mu) / sigma)
                }
            }
            Exponential { rate } => {
                if y <= 0.0 {
                    0.0
                } else {
                    -(-rate * y).exp_m1()
                }
            }
            Uniform { a, b } => ((y - a) / (b - a)).clamp(0.0, 1.0),
            Empirical(ref values) => {
                values.iter().filter(|&&v| v <= y).count() as f64 / values.len() as f64
            }
        }
    }

    pub fn mean(&self) -> f64 {
        use DistributionSpec::*;
        match *self {
            Normal { mu, .. } => mu,
            Lognormal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp(),
            Exponential { rate } => 1.0 / rate,
            Uniform { a, b } => 0.5 * (a + b),
            Empirical(ref values) => values.iter().sum::<f64>() / values.len() as f64,
        }
    }

    pub fn variance(&self) -> f64 {
        use DistributionSpec::*;
        match *self {
            Normal { sigma, .. } => sigma * sigma,
            Lognormal { mu, sigma } => {
                let s2 = sigma * sigma;
                s2.exp_m1() * (2.0 * mu + s2).exp()
            }
            Exponential { rate } => 1.0 / (rate * rate),
            Uniform { a, b } => (b - a).powi(2) / 12.0,
            Empirical(ref values) => {
                let m = self.mean();
                values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64
            }
        }
    }

    /// Quantile set at level `tau`: a point for continuous laws, the closed
    /// interval `{z : F(z-) <= tau <= F(z)}` for Empirical.
    pub fn quantile(&self, tau: f64) -> Result<(f64, f64)> {
        check_level(tau)?;
        use DistributionSpec::*;
        let q = match *self {
            Normal { mu, sigma } => mu + sigma * std_normal_quantile(tau),
            Lognormal { mu, sigma } => (mu + sigma * std_normal_quantile(tau)).exp(),
            Exponential { rate } => -(-tau).ln_1p() / rate,
            Uniform { a, b } => a + tau * (b - a),
            Empirical(ref values) => return Ok(empirical_quantile_interval(values, tau)),
        };
        Ok((q, q))
    }

    /// `E[(Y - z)+]` in closed form.
    pub fn upper_partial_moment(&self, z: f64) -> f64 {
        use DistributionSpec::*;
        match *self {
            Normal { mu, sigma } => {
                let d = (z - mu) / sigma;
                sigma * std_normal_pdf(d) - (z - mu) * (1.0 - std_normal_cdf(d))
            }
            Lognormal { mu, sigma } => {
                if z <= 0.0 {
                    return self.mean() - z;
                }
                let lz = z.ln();
                let above_mass = std_normal_cdf((mu - lz) / sigma);
                let above_first = (mu + 0.5 * sigma * sigma).exp()
                    * std_normal_cdf((mu + sigma * sigma - lz) / sigma);
                above_first - z * above_mass
            }
            Exponential { rate } => {
                if z <= 0.0 {
                    1.0 / rate - z
                } else {
                    (-rate * z).exp() / rate
                }
            }
            Uniform { a, b } => {
                if z <= a {
                    0.5 * (a + b) - z
                } else if z >= b {
                    0.0
                } else {
                    (b - z).powi(2) / (2.0 * (b - a))
                }
            }
            Empirical(ref values) => {
                values.iter().map(|&y| (y - z).max(0.0)).sum::<f64>() / values.len() as f64
            }
        }
    }

    /// The `tau`-expectile, by root-finding the closed-form partial moments.
    pub fn expectile(&self, tau: f64) -> Result<f64> {
        check_level(tau)?;
        if let DistributionSpec::Uniform { a, b } = *self {
            let (s, t) = (tau.sqrt(), (1.0 - tau).sqrt());
            return Ok(a + (b - a) * s / (s + t));
        }
        let mean = self.mean();
        let identify = |z: f64| {
            let upper = self.upper_partial_moment(z);
            let lower = z - mean + upper;
            tau * upper - (1.0 - tau) * lower
        };
        let (lo, hi) = self.expectile_bracket();
        // wide brackets (lognormal); bisect down to float resolution
        root1d(identify, Bracket::new(lo, hi)?, f64::MIN_POSITIVE)
    }

    fn expectile_bracket(&self) -> (f64, f64) {
        use DistributionSpec::*;
        match *self {
            Normal { mu, sigma } => (mu - 10.0 * sigma, mu + 10.0 * sigma),
            Lognormal { mu, sigma } => (0.0, (mu + 12.0 * sigma + sigma * sigma).exp()),
            Exponential { rate } => (0.0, 60.0 / rate),
            Uniform { a, b } => (a, b),
            Empirical(ref values) => {
                let (lo, hi) = min_max(values);
                let pad = 0.01 * (hi - lo).max(1e-9);
                (lo - pad, hi + pad)
            }
        }
    }

    /// `E[Y^p]` where a closed form exists.
    pub fn raw_moment(&self, p: f64) -> Option<f64> {
        use DistributionSpec::*;
        match *self {
            Lognormal { mu, sigma } => Some((p * mu + 0.5 * p * p * sigma * sigma).exp()),
            Exponential { rate } if p > -1.0 => Some(gamma(1.0 + p) / rate.powf(p)),
            Uniform { a, b } if a >= 0.0 && p > -1.0 && (a > 0.0 || p >= 0.0) => {
                Some((b.powf(p + 1.0) - a.powf(p + 1.0)) / ((p + 1.0) * (b - a)))
            }
            Empirical(ref values) if values.iter().all(|&v| v > 0.0) => {
                Some(values.iter().map(|v| v.powf(p)).sum::<f64>() / values.len() as f64)
            }
            _ => None,
        }
    }

    /// Law of `g(Y)` when it is again one of the parametric variants.
    pub fn pushforward(&self, g: &Bijection) -> Option<DistributionSpec> {
        use DistributionSpec::*;
        match (self, g) {
            (_, Bijection::Identity) => Some(self.clone()),
            (Empirical(values), _) => values
                .iter()
                .map(|&v| g.apply(v).ok())
                .collect::<Option<Vec<_>>>()
                .map(Empirical),
            (&Normal { mu, sigma }, Bijection::Negate) => Some(Normal { mu: -mu, sigma }),
            (&Normal { mu, sigma }, Bijection::Exp) => Some(Lognormal { mu, sigma }),
            (&Normal { mu, sigma }, &Bijection::AffineExp { a, b }) => Some(Lognormal {
                mu: a * mu + b,
                sigma: a.abs() * sigma,
            }),
            (&Lognormal { mu, sigma }, Bijection::Log | Bijection::BoxCox { a: 0.0 }) => {
                Some(Normal { mu, sigma })
            }
            (&Lognormal { mu, sigma }, &Bijection::Power { a } | &Bijection::NonnegPower { a }) => {
                Some(Lognormal {
                    mu: a * mu,
                    sigma: a.abs() * sigma,
                })
            }
            (&Uniform { a, b }, Bijection::Negate) => Some(Uniform { a: -b, b: -a }),
            _ => None,
        }
    }
}

/// Closed-form value of `functional` under `dist`, if one is known.
///
/// `Ok(None)` means no closed form is implemented and the caller should fall
/// back to Monte Carlo. A functional whose transformation is undefined on
/// the support is a domain error.
pub fn analytic_functional(
    dist: &DistributionSpec,
    functional: &FunctionalSpec,
) -> Result<Option<FunctionalValue>> {
    dist.validate()?;
    if let Some(g) = functional.transform() {
        dist.require_support_in(&g.domain(), format_args!("domain of {g}"))?;
    }
    let value = match *functional {
        FunctionalSpec::Mean => Some(FunctionalValue::Scalar(dist.mean())),
        FunctionalSpec::Quantile { tau } => {
            let (lo, hi) = dist.quantile(tau)?;
            Some(FunctionalValue::interval(lo, hi))
        }
        FunctionalSpec::Expectile { tau } => Some(FunctionalValue::Scalar(dist.expectile(tau)?)),
        FunctionalSpec::GMean { g } => g_mean(dist, &g)?.map(FunctionalValue::Scalar),
        FunctionalSpec::GExpectile { tau, g } => match dist.pushforward(&g) {
            Some(law) => Some(FunctionalValue::Scalar(g.invert(law.expectile(tau)?)?)),
            None => None,
        },
        FunctionalSpec::MvPair { g } => dist
            .pushforward(&g)
            .map(|law| FunctionalValue::Pair(law.mean(), law.variance())),
    };
    Ok(value)
}

fn g_mean(dist: &DistributionSpec, g: &Bijection) -> Result<Option<f64>> {
    use Bijection::*;
    // (E[Y^a])^{1/a}, shared by the power rows and Box-Cox with a != 0
    let power_mean = |a: f64| dist.raw_moment(a).map(|m| m.powf(1.0 / a));
    let v = match *g {
        Identity | Negate => Some(dist.mean()),
        Power { a } | NonnegPower { a } => power_mean(a),
        BoxCox { a } if a != 0.0 => power_mean(a),
        _ => match dist.pushforward(g) {
            Some(law) => Some(g.invert(law.mean())?),
            None => None,
        },
    };
    Ok(v)
}

fn check_level(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::parameter(
            "tau",
            format!("requires 0 < tau < 1, got {tau}"),
        ))
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// `{z : F(z-) <= tau <= F(z)}` for the step CDF of `values`.
pub fn empirical_quantile_interval(values: &[f64], tau: f64) -> (f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted_quantile_interval(&sorted, tau)
}

/// As [`empirical_quantile_interval`] for data already sorted ascending.
pub fn sorted_quantile_interval(sorted: &[f64], tau: f64) -> (f64, f64) {
    let n = sorted.len();
    let target = n as f64 * tau;
    let k = target.round();
    if (target - k).abs() <= 1e-9 * target.max(1.0) && k >= 1.0 && (k as usize) < n {
        // F equals tau on [v_k, v_{k+1})
        let k = k as usize;
        (sorted[k - 1], sorted[k])
    } else {
        let idx = (target.ceil() as usize).clamp(1, n);
        (sorted[idx - 1], sorted[idx - 1])
    }
}

pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn std_normal_quantile(p: f64) -> f64 {
    let mut x = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    // the starting value is good to ~1e-11; Newton on the accurate cdf
    // takes it to rounding level
    for _ in 0..2 {
        let pdf = std_normal_pdf(x);
        if !x.is_finite() || pdf == 0.0 {
            break;
        }
        x -= (std_normal_cdf(x) - p) / pdf;
    }
    x
}

/// Iterator over seeded iid draws from a [`DistributionSpec`].
pub struct Sampler<'a> {
    dist: &'a DistributionSpec,
    rng: ChaCha8Rng,
}

impl Iterator for Sampler<'_> {
    type Item = f64;

    #[inline]
    fn next(&mut self) -> Option<f64> {
        use DistributionSpec::*;
        let rng = &mut self.rng;
        let y = match *self.dist {
            Normal { mu, sigma } => mu + sigma * rng.sample::<f64, _>(StandardNormal),
            Lognormal { mu, sigma } => (mu + sigma * rng.sample::<f64, _>(StandardNormal)).exp(),
            Exponential { rate } => rng.sample::<f64, _>(Exp1) / rate,
            Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
            Empirical(ref values) => values[rng.random_range(0..values.len())],
        };
        Some(y)
    }
}

/// `n` seeded iid draws.
pub fn sample_iid(dist: &DistributionSpec, n: usize, seed: Seed) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::Precondition("sample size must be at least 1".into()));
    }
    Ok(dist.sampler(seed)?.take(n).collect())
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use DistributionSpec::*;
        match self {
            Normal { mu, sigma } => write!(f, "normal({mu},{sigma})"),
            Lognormal { mu, sigma } => write!(f, "lognormal({mu},{sigma})"),
            Exponential { rate } => write!(f, "exponential({rate})"),
            Uniform { a, b } => write!(f, "uniform({a},{b})"),
            Empirical(values) => {
                let list: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                write!(f, "empirical({})", list.join(","))
            }
        }
    }
}

impl FromStr for DistributionSpec {
    type Err = Error;

    /// `normal(mu,sigma)`, `lognormal(mu,sigma)`, `exponential(rate)`,
    /// `uniform(a,b)`, `empirical(v1,v2,...)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let open = s.find('(').ok_or_else(|| {
            Error::parse(format!(
                "distribution `{s}` needs parameters in parentheses"
            ))
        })?;
        if !s.ends_with(')') {
            return Err(Error::parse(format!("unbalanced parentheses in `{s}`")));
        }
        let params = parse_number_list(&s[open + 1..s.len() - 1])?;
        let name = s[..open].trim();
        let arity = |n: usize| -> Result<()> {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::parse(format!(
                    "`{name}` takes {n} parameter(s), got {}",
                    params.len()
                )))
            }
        };
        match name {
            "normal" => {
                arity(2)?;
                DistributionSpec::normal(params[0], params[1])
            }
            "lognormal" => {
                arity(2)?;
                DistributionSpec::lognormal(params[0], params[1])
            }
            "exponential" => {
                arity(1)?;
                DistributionSpec::exponential(params[0])
            }
            "uniform" => {
                arity(2)?;
                DistributionSpec::uniform(params[0], params[1])
            }
            "empirical" => DistributionSpec::empirical(params),
            other => Err(Error::parse(format!("unknown distribution `{other}`"))),
        }
    }
}

impl Serialize for DistributionSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DistributionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{mc_expectation, McEstimate};
    use std::f64::consts::{E, LN_2};

    fn scalar(v: Option<FunctionalValue>) -> f64 {
        match v {
            Some(FunctionalValue::Scalar(x)) => x,
            other => panic!("expected scalar, got {other:?}"),
        }
    }

    #[test]
    fn sample_means() {
        let u = sample_iid(
            &DistributionSpec::uniform(0.0, 1.0).unwrap(),
            100_000,
            Seed(1),
        )
        .unwrap();
        assert!(McEstimate::from_values(u).agrees_with(0.5, 0.0));
        let e = sample_iid(
            &DistributionSpec::exponential(2.0).unwrap(),
            100_000,
            Seed(2),
        )
        .unwrap();
        assert!(McEstimate::from_values(e).agrees_with(0.5, 0.0));
        let ln = sample_iid(
            &DistributionSpec::lognormal(0.0, 1.0).unwrap(),
            1_000_000,
            Seed(3),
        )
        .unwrap();
        assert!(McEstimate::from_values(ln.iter().map(|y| y.ln())).agrees_with(0.0, 0.0));
    }

    #[test]
    fn lognormal_is_exp_of_normal() {
        let dist = DistributionSpec::lognormal(0.4, 1.5).unwrap();
        let logs: Vec<f64> = sample_iid(&dist, 1_000_000, Seed(5))
            .unwrap()
            .iter()
            .map(|y| y.ln())
            .collect();
        let mean = McEstimate::from_values(logs.iter().copied());
        assert!(mean.agrees_with(0.4, 0.0), "{mean:?}");
        let sq = McEstimate::from_values(logs.iter().map(|l| (l - 0.4).powi(2)));
        assert!(sq.agrees_with(2.25, 0.0), "{sq:?}");
    }

    #[test]
    fn sampling_is_reproducible() {
        let d = DistributionSpec::normal(1.0, 2.0).unwrap();
        assert_eq!(
            sample_iid(&d, 50, Seed(11)).unwrap(),
            sample_iid(&d, 50, Seed(11)).unwrap()
        );
    }

    #[test]
    fn cdf_values() {
        assert_eq!(DistributionSpec::normal(0.0, 1.0).unwrap().cdf(0.0), 0.5);
        let e = DistributionSpec::exponential(1.0).unwrap().cdf(LN_2);
        assert!((e - 0.5).abs() < 1e-15);
        let emp = DistributionSpec::empirical(vec![1.0, 2.0, 3.0]).unwrap();
        assert!((emp.cdf(2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(emp.cdf(0.5), 0.0);
    }

    #[test]
    fn normal_cdf_reference_values() {
        // Phi(1), Phi(-2), Phi(3) to 16 digits
        assert!((std_normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-12);
        assert!((std_normal_cdf(-2.0) - 0.022_750_131_948_179_2).abs() < 1e-12);
        assert!((std_normal_cdf(3.0) - 0.998_650_101_968_369_9).abs() < 1e-12);
    }

    #[test]
    fn cdf_inverts_quantile() {
        let dists = [
            DistributionSpec::normal(0.3, 2.0).unwrap(),
            DistributionSpec::lognormal(-0.5, 0.7).unwrap(),
            DistributionSpec::exponential(3.0).unwrap(),
            DistributionSpec::uniform(-1.0, 4.0).unwrap(),
        ];
        for d in &dists {
            for i in 1..=9 {
                let tau = i as f64 / 10.0;
                let (q, q2) = d.quantile(tau).unwrap();
                assert_eq!(q, q2);
                assert!((d.cdf(q) - tau).abs() < 1e-12, "{d} tau={tau}");
            }
        }
    }

    #[test]
    fn analytic_means_agree_with_monte_carlo() {
        let dists = [
            DistributionSpec::normal(0.3, 2.0).unwrap(),
            DistributionSpec::lognormal(-0.5, 0.7).unwrap(),
            DistributionSpec::exponential(3.0).unwrap(),
            DistributionSpec::uniform(-1.0, 4.0).unwrap(),
        ];
        for (i, d) in dists.iter().enumerate() {
            let est = mc_expectation(|y| y, d, 1_000_000, Seed(100 + i as u64)).unwrap();
            assert!(
                est.agrees_with(d.mean(), 0.0),
                "{d}: {est:?} vs {}",
                d.mean()
            );
        }
    }

    #[test]
    fn lognormal_power_functional() {
        let d = DistributionSpec::lognormal(0.0, 1.0).unwrap();
        let v = scalar(
            analytic_functional(
                &d,
                &FunctionalSpec::GMean {
                    g: Bijection::Power { a: 2.0 },
                },
            )
            .unwrap(),
        );
        assert!((v - E).abs() < 1e-14);
        // independent check: (E[Y^2])^{1/2} by Monte Carlo
        let est = mc_expectation(|y| y * y, &d, 1_000_000, Seed(8)).unwrap();
        assert!((est.value.sqrt() - E).abs() <= 3.0 * est.stderr / (2.0 * E));
    }

    #[test]
    fn entropic_functional() {
        let d = DistributionSpec::normal(0.0, 1.0).unwrap();
        let v =
            scalar(analytic_functional(&d, &FunctionalSpec::GMean { g: Bijection::Exp }).unwrap());
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn exponential_quantile() {
        let d = DistributionSpec::exponential(1.0).unwrap();
        match analytic_functional(&d, &FunctionalSpec::Quantile { tau: 0.75 }).unwrap() {
            Some(FunctionalValue::Interval { lo, hi }) => {
                assert!((lo - 4f64.ln()).abs() < 1e-14);
                assert_eq!(lo, hi);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn power_on_negative_support_is_domain_error() {
        let d = DistributionSpec::normal(0.0, 1.0).unwrap();
        let err = analytic_functional(
            &d,
            &FunctionalSpec::GMean {
                g: Bijection::Power { a: 2.0 },
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
        assert!(analytic_functional(&d, &FunctionalSpec::GMean { g: Bijection::Log }).is_err());
    }

    #[test]
    fn unavailable_falls_through() {
        let d = DistributionSpec::exponential(1.0).unwrap();
        let v = analytic_functional(
            &d,
            &FunctionalSpec::GExpectile {
                tau: 0.3,
                g: Bijection::Log,
            },
        )
        .unwrap();
        assert_eq!(v, None);
    }

    #[test]
    fn empirical_quantile_intervals() {
        assert_eq!(
            empirical_quantile_interval(&[1.0, 1.0, 2.0, 2.0], 0.5),
            (1.0, 2.0)
        );
        assert_eq!(
            empirical_quantile_interval(&[3.0, 1.0, 2.0], 0.5),
            (2.0, 2.0)
        );
        let ys: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(empirical_quantile_interval(&ys, 0.9), (90.0, 91.0));
        assert_eq!(empirical_quantile_interval(&ys, 0.905), (91.0, 91.0));
        assert_eq!(empirical_quantile_interval(&[5.0], 0.5), (5.0, 5.0));
    }

    #[test]
    fn expectiles() {
        let u = DistributionSpec::uniform(0.0, 1.0).unwrap();
        assert!((u.expectile(0.75).unwrap() - 0.633_974_596_215_561).abs() < 1e-12);
        // expectile at 1/2 is the mean
        for d in [
            DistributionSpec::normal(1.0, 2.0).unwrap(),
            DistributionSpec::lognormal(0.0, 1.0).unwrap(),
            DistributionSpec::exponential(2.0).unwrap(),
            DistributionSpec::empirical(vec![1.0, 2.0, 7.0]).unwrap(),
        ] {
            let e = d.expectile(0.5).unwrap();
            assert!((e - d.mean()).abs() < 1e-10, "{d}: {e} vs {}", d.mean());
        }
        // partial-moment identity at the computed expectile, checked by brute force
        let d = DistributionSpec::exponential(1.0).unwrap();
        let e = d.expectile(0.8).unwrap();
        let ys = sample_iid(&d, 2_000_000, Seed(4)).unwrap();
        let lhs = McEstimate::from_values(
            ys.iter()
                .map(|y| 0.8 * (y - e).max(0.0) - 0.2 * (e - y).max(0.0)),
        );
        assert!(lhs.agrees_with(0.0, 0.0), "{lhs:?}");
    }

    #[test]
    fn parse_and_display() {
        for s in [
            "normal(0,1)",
            "lognormal(0.5,2)",
            "exponential(1)",
            "uniform(0,1)",
            "empirical(1,1,2,2)",
        ] {
            let d: DistributionSpec = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!("normal(0,-1)".parse::<DistributionSpec>().is_err());
        assert!("normal(0)".parse::<DistributionSpec>().is_err());
        assert!("empirical()".parse::<DistributionSpec>().is_err());
        assert!("cauchy(0,1)".parse::<DistributionSpec>().is_err());
    }
}
