//! Scoring functions `S(z, y)` and their transformed variants.
//!
//! A [`ScoreSpec`] pairs a family with a [`TransformMode`]. Evaluation is
//! split in two stages so Monte Carlo loops can transform each draw and each
//! grid point once: `prepare_y` / `prepare_z` map into the family's own
//! units and `core` evaluates the untransformed family there.
//!
//! Indicators follow `1{z >= y}`: ties count as `z >= y` in every family.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{check_tau, split_params, Params};
use crate::transforms::{Bijection, Interval};

/// A user-registered convex generator.
#[derive(Debug, Clone, Copy)]
pub struct CustomGenerator {
    pub name: &'static str,
    pub phi: fn(f64) -> f64,
    pub dphi: fn(f64) -> f64,
    pub d2phi: Option<fn(f64) -> f64>,
    pub domain: Interval,
    pub strictly_convex: bool,
}

/// Convex `phi` for the expectile and Bregman families.
#[derive(Debug, Clone, Copy)]
pub enum ConvexGenerator {
    /// `t^2`
    Square,
    /// `exp(t)`
    Exp,
    /// `-log t` on `(0, inf)`
    NegLog,
    /// `t log t` on `(0, inf)`
    XLogX,
    Custom(CustomGenerator),
}

impl PartialEq for ConvexGenerator {
    fn eq(&self, other: &Self) -> bool {
        self.name() == other.name() && self.domain() == other.domain()
    }
}

impl ConvexGenerator {
    pub const BUILTIN: [ConvexGenerator; 4] = [
        ConvexGenerator::Square,
        ConvexGenerator::Exp,
        ConvexGenerator::NegLog,
        ConvexGenerator::XLogX,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ConvexGenerator::Square => "square",
            ConvexGenerator::Exp => "exp",
            ConvexGenerator::NegLog => "neglog",
            ConvexGenerator::XLogX => "xlogx",
            ConvexGenerator::Custom(c) => c.name,
        }
    }

    pub fn domain(&self) -> Interval {
        match self {
            ConvexGenerator::Square | ConvexGenerator::Exp => Interval::REAL,
            ConvexGenerator::NegLog | ConvexGenerator::XLogX => Interval::POSITIVE,
            ConvexGenerator::Custom(c) => c.domain,
        }
    }

    pub fn strictly_convex(&self) -> bool {
        match self {
            ConvexGenerator::Custom(c) => c.strictly_convex,
            _ => true,
        }
    }

    #[inline]
    pub fn phi(&self, t: f64) -> f64 {
        match self {
            ConvexGenerator::Square => t * t,
            ConvexGenerator::Exp => t.exp(),
            ConvexGenerator::NegLog => -t.ln(),
            ConvexGenerator::XLogX => t * t.ln(),
            ConvexGenerator::Custom(c) => (c.phi)(t),
        }
    }

    #[inline]
    pub fn dphi(&self, t: f64) -> f64 {
        match self {
            ConvexGenerator::Square => 2.0 * t,
            ConvexGenerator::Exp => t.exp(),
            ConvexGenerator::NegLog => -1.0 / t,
            ConvexGenerator::XLogX => t.ln() + 1.0,
            ConvexGenerator::Custom(c) => (c.dphi)(t),
        }
    }

    /// `phi''(t)`, if the generator provides it.
    pub fn d2phi(&self, t: f64) -> Option<f64> {
        match self {
            ConvexGenerator::Square => Some(2.0),
            ConvexGenerator::Exp => Some(t.exp()),
            ConvexGenerator::NegLog => Some(1.0 / (t * t)),
            ConvexGenerator::XLogX => Some(1.0 / t),
            ConvexGenerator::Custom(c) => c.d2phi.map(|f| f(t)),
        }
    }

    /// `phi(y) - phi(z) - phi'(z)(y - z)`, computed without cancellation for
    /// the square.
    #[inline]
    pub fn gap(&self, z: f64, y: f64) -> f64 {
        match self {
            ConvexGenerator::Square => (y - z) * (y - z),
            _ => self.phi(y) - self.phi(z) + self.dphi(z) * (z - y),
        }
    }
}

impl fmt::Display for ConvexGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConvexGenerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ConvexGenerator::BUILTIN
            .into_iter()
            .find(|g| g.name() == s.trim())
            .ok_or_else(|| Error::parse(format!("unknown convex generator `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScoreFamily {
    /// `(z - y)^2`
    Se,
    /// `|z - y|`
    Ae,
    /// `(1{z >= y} - tau)(g(z) - g(y))` for nondecreasing `g`.
    Gpl { tau: f64, g: Bijection },
    /// `(1{z >= y} - tau)(z - y)`
    Apl { tau: f64 },
    /// `|1{z >= y} - tau| (phi(y) - phi(z) + phi'(z)(z - y))`
    Expectile { tau: f64, phi: ConvexGenerator },
    /// `(phi(y) - phi(z) + phi'(z)(z - y)) / 2`
    Bregman { phi: ConvexGenerator },
    /// `x2^{-2}(x1^2 - 2 x2 - 2 x1 y + y^2)` for a (mean, variance) forecast.
    MeanVariance,
}

impl ScoreFamily {
    pub const NAMES: [&'static str; 7] = ["se", "ae", "gpl", "apl", "expectile", "bregman", "mv"];

    pub fn name(&self) -> &'static str {
        match self {
            ScoreFamily::Se => "se",
            ScoreFamily::Ae => "ae",
            ScoreFamily::Gpl { .. } => "gpl",
            ScoreFamily::Apl { .. } => "apl",
            ScoreFamily::Expectile { .. } => "expectile",
            ScoreFamily::Bregman { .. } => "bregman",
            ScoreFamily::MeanVariance => "mv",
        }
    }

    /// Where the family itself is defined (in its own units).
    pub fn domain(&self) -> Interval {
        match self {
            ScoreFamily::Gpl { g, .. } => g.domain(),
            ScoreFamily::Expectile { phi, .. } | ScoreFamily::Bregman { phi } => phi.domain(),
            _ => Interval::REAL,
        }
    }

    /// True for families built on an indicator (higher Monte Carlo variance,
    /// kinked in `z`).
    pub fn has_indicator(&self) -> bool {
        matches!(
            self,
            ScoreFamily::Ae | ScoreFamily::Gpl { .. } | ScoreFamily::Apl { .. }
        )
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ScoreFamily::Gpl { tau, g } => {
                check_tau(tau)?;
                if !g.is_increasing() {
                    return Err(Error::parameter(
                        "gpl",
                        format!("requires nondecreasing g, got {g}"),
                    ));
                }
            }
            ScoreFamily::Apl { tau } => check_tau(tau)?,
            ScoreFamily::Expectile { tau, .. } => check_tau(tau)?,
            _ => {}
        }
        Ok(())
    }
}

/// How a bijection `g` enters the score.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TransformMode {
    #[default]
    None,
    /// `S(z, g(y))`
    RealizationOnly(Bijection),
    /// `S(g^{-1}(z), y)`
    PredictionOnly(Bijection),
    /// `S(g(z), g(y))`
    Both(Bijection),
}

impl TransformMode {
    pub fn bijection(&self) -> Option<Bijection> {
        match *self {
            TransformMode::None => None,
            TransformMode::RealizationOnly(g)
            | TransformMode::PredictionOnly(g)
            | TransformMode::Both(g) => Some(g),
        }
    }

    /// Sign of `d(prepared z)/dz`.
    pub fn orientation(&self) -> f64 {
        match self {
            TransformMode::PredictionOnly(g) | TransformMode::Both(g) => g.monotonicity().sign(),
            _ => 1.0,
        }
    }

    /// Realization in the family's units.
    #[inline]
    pub fn map_y(&self, y: f64) -> Result<f64> {
        match self {
            TransformMode::RealizationOnly(g) | TransformMode::Both(g) => g.apply(y),
            _ => Ok(y),
        }
    }

    /// Prediction in the family's units.
    #[inline]
    pub fn map_z(&self, z: f64) -> Result<f64> {
        match self {
            TransformMode::Both(g) => g.apply(z),
            TransformMode::PredictionOnly(g) => g.invert(z),
            _ => Ok(z),
        }
    }

    /// `d map_z / dz`.
    pub fn map_z_slope(&self, z: f64) -> Result<f64> {
        match self {
            TransformMode::Both(g) => g.deriv(z),
            TransformMode::PredictionOnly(g) => Ok(1.0 / g.deriv(g.invert(z)?)?),
            _ => Ok(1.0),
        }
    }

    /// Set of admissible predictions given the family's own domain.
    pub fn prediction_domain(&self, family_domain: Interval) -> Interval {
        match self {
            TransformMode::Both(g) => g.domain(),
            TransformMode::PredictionOnly(g) => g.codomain(),
            _ => family_domain,
        }
    }

    fn write_suffix(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransformMode::None => Ok(()),
            TransformMode::RealizationOnly(g) => write!(f, "@realization:{g}"),
            TransformMode::PredictionOnly(g) => write!(f, "@prediction:{g}"),
            TransformMode::Both(g) => write!(f, "@both:{g}"),
        }
    }

    pub(crate) fn parse_suffix(s: &str) -> Result<TransformMode> {
        let (mode, g) = s.split_once(':').unwrap_or((s, ""));
        let g = || -> Result<Bijection> {
            if g.trim().is_empty() {
                Err(Error::parse(format!(
                    "transform mode `{mode}` needs a bijection, e.g. `@{mode}:log`"
                )))
            } else {
                g.parse()
            }
        };
        match mode.trim() {
            "none" => Ok(TransformMode::None),
            "realization" => Ok(TransformMode::RealizationOnly(g()?)),
            "prediction" => Ok(TransformMode::PredictionOnly(g()?)),
            "both" => Ok(TransformMode::Both(g()?)),
            other => Err(Error::parse(format!(
                "unknown transform mode `{other}` (expected none, realization, prediction or both)"
            ))),
        }
    }
}

/// A prediction: a scalar, or `(x1, x2)` for the mean-variance family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prediction {
    Scalar(f64),
    Pair(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreSpec {
    pub family: ScoreFamily,
    pub transform: TransformMode,
}

impl ScoreSpec {
    pub fn new(family: ScoreFamily, transform: TransformMode) -> Result<Self> {
        let spec = ScoreSpec { family, transform };
        spec.validate()?;
        Ok(spec)
    }

    pub fn plain(family: ScoreFamily) -> Result<Self> {
        ScoreSpec::new(family, TransformMode::None)
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        if self.is_pair()
            && matches!(
                self.transform,
                TransformMode::Both(_) | TransformMode::PredictionOnly(_)
            )
        {
            return Err(Error::parameter(
                "mv",
                "the mean-variance score admits only no transform or a realization transform",
            ));
        }
        Ok(())
    }

    pub fn is_pair(&self) -> bool {
        matches!(self.family, ScoreFamily::MeanVariance)
    }

    /// Same family, different transform mode.
    pub fn with_transform(&self, transform: TransformMode) -> Result<Self> {
        ScoreSpec::new(self.family, transform)
    }

    /// Admissible scalar predictions `z`.
    pub fn prediction_domain(&self) -> Interval {
        self.transform.prediction_domain(self.family.domain())
    }

    fn in_family_domain(&self, v: f64, what: &str) -> Result<f64> {
        let domain = self.family.domain();
        if domain.contains(v) {
            Ok(v)
        } else {
            Err(Error::domain(v, domain, format_args!("{what} of {self}")))
        }
    }

    /// Realization mapped into the family's units.
    #[inline]
    pub fn prepare_y(&self, y: f64) -> Result<f64> {
        let w = self.transform.map_y(y)?;
        self.in_family_domain(w, "realization")
    }

    /// Scalar prediction mapped into the family's units.
    #[inline]
    pub fn prepare_z(&self, z: f64) -> Result<f64> {
        let c = self.transform.map_z(z)?;
        self.in_family_domain(c, "prediction")
    }

    /// The untransformed family at prepared arguments. Panics for the pair
    /// family; use [`ScoreSpec::core_pair`].
    #[inline]
    pub fn core(&self, z: f64, y: f64) -> f64 {
        let hit = if z >= y { 1.0 } else { 0.0 };
        match self.family {
            ScoreFamily::Se => (z - y) * (z - y),
            ScoreFamily::Ae => (z - y).abs(),
            ScoreFamily::Gpl { tau, g } => {
                (hit - tau) * (g.forward_unchecked(z) - g.forward_unchecked(y))
            }
            ScoreFamily::Apl { tau } => (hit - tau) * (z - y),
            ScoreFamily::Expectile { tau, phi } => (hit - tau).abs() * phi.gap(z, y),
            ScoreFamily::Bregman { phi } => 0.5 * phi.gap(z, y),
            ScoreFamily::MeanVariance => panic!("mean-variance score needs a pair prediction"),
        }
    }

    /// Mean-variance score at prepared arguments.
    #[inline]
    pub fn core_pair(&self, x1: f64, x2: f64, y: f64) -> f64 {
        (x1 * x1 - 2.0 * x2 - 2.0 * x1 * y + y * y) / (x2 * x2)
    }

    /// `d core / dz` (right derivative at kinks). `None` when the generator
    /// lacks `phi''`.
    pub fn core_dz(&self, z: f64, y: f64) -> Option<f64> {
        let hit = if z >= y { 1.0 } else { 0.0 };
        match self.family {
            ScoreFamily::Se => Some(2.0 * (z - y)),
            ScoreFamily::Ae => Some(2.0 * hit - 1.0),
            ScoreFamily::Gpl { tau, g } => Some((hit - tau) * g.derivative_unchecked(z)),
            ScoreFamily::Apl { tau } => Some(hit - tau),
            ScoreFamily::Expectile { tau, phi } => {
                phi.d2phi(z).map(|d2| (hit - tau).abs() * d2 * (z - y))
            }
            ScoreFamily::Bregman { phi } => phi.d2phi(z).map(|d2| 0.5 * d2 * (z - y)),
            ScoreFamily::MeanVariance => None,
        }
    }

    /// `S(z, y)` for scalar predictions.
    pub fn score(&self, z: f64, y: f64) -> Result<f64> {
        if self.is_pair() {
            return Err(Error::InvalidInput(format!(
                "{self} needs a (mean, variance) prediction"
            )));
        }
        Ok(self.core(self.prepare_z(z)?, self.prepare_y(y)?))
    }

    /// `S((x1, x2), y)` for the mean-variance family.
    pub fn score_pair(&self, x1: f64, x2: f64, y: f64) -> Result<f64> {
        if !self.is_pair() {
            return Err(Error::InvalidInput(format!(
                "{self} takes scalar predictions"
            )));
        }
        check_variance(x2)?;
        Ok(self.core_pair(x1, x2, self.prepare_y(y)?))
    }

    /// `dS/dz` at a scalar prediction.
    pub fn score_dz(&self, z: f64, y: f64) -> Result<Option<f64>> {
        let zc = self.prepare_z(z)?;
        let yc = self.prepare_y(y)?;
        match self.core_dz(zc, yc) {
            Some(d) => Ok(Some(d * self.transform.map_z_slope(z)?)),
            None => Ok(None),
        }
    }
}

pub(crate) fn check_variance(x2: f64) -> Result<()> {
    if x2 > 0.0 && x2.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(x2, Interval::POSITIVE, "variance coordinate"))
    }
}

/// `S(z, y)` for any prediction shape.
pub fn evaluate_score(spec: &ScoreSpec, z: Prediction, y: f64) -> Result<f64> {
    match z {
        Prediction::Scalar(z) => spec.score(z, y),
        Prediction::Pair(x1, x2) => spec.score_pair(x1, x2, y),
    }
}

/// Realized score `(1/n) sum S(z_i, y_i)`.
pub fn average_score(spec: &ScoreSpec, z: &[Prediction], y: &[f64]) -> Result<f64> {
    if z.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: z.len(),
            right: y.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut total = 0.0;
    for (i, (&zi, &yi)) in z.iter().zip(y).enumerate() {
        total += evaluate_score(spec, zi, yi).map_err(|e| e.at_index(i))?;
    }
    Ok(total / y.len() as f64)
}

/// [`average_score`] for scalar predictions.
pub fn average_score_scalar(spec: &ScoreSpec, z: &[f64], y: &[f64]) -> Result<f64> {
    let z: Vec<Prediction> = z.iter().map(|&v| Prediction::Scalar(v)).collect();
    average_score(spec, &z, y)
}

/// Outcome of [`homogeneity_probe`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityReport {
    /// The first candidate order satisfied by every probe, if any.
    pub order: Option<f64>,
    /// Scale factors that were dropped because they are not positive.
    pub skipped: Vec<f64>,
}

/// Looks for `b` with `S(cz, cy) = c^b S(z, y)` over the probes.
///
/// Only `c > 0` is probed: indicator families are not homogeneous under
/// negative scaling unless `tau = 1/2`.
pub fn homogeneity_probe(
    spec: &ScoreSpec,
    order_candidates: &[f64],
    c_grid: &[f64],
    sample: &[(f64, f64)],
) -> Result<HomogeneityReport> {
    let (scales, skipped): (Vec<f64>, Vec<f64>) = c_grid.iter().partition(|&&c| c > 0.0);
    let mut base = Vec::with_capacity(sample.len());
    for &(z, y) in sample {
        base.push(spec.score(z, y)?);
    }
    let mut scaled = Vec::with_capacity(scales.len() * sample.len());
    for &c in &scales {
        for &(z, y) in sample {
            scaled.push(spec.score(c * z, c * y)?);
        }
    }
    let order = order_candidates.iter().copied().find(|&b| {
        scales.iter().enumerate().all(|(k, &c)| {
            base.iter().enumerate().all(|(i, &s)| {
                let expected = c.powf(b) * s;
                let got = scaled[k * sample.len() + i];
                (got - expected).abs() <= 1e-9 * expected.abs().max(1e-300)
            })
        })
    });
    Ok(HomogeneityReport { order, skipped })
}

impl fmt::Display for ScoreFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreFamily::Gpl { tau, g } => {
                write!(f, "gpl:tau={tau}")?;
                if !g.is_identity() {
                    write!(f, ":g={g}")?;
                }
                Ok(())
            }
            ScoreFamily::Apl { tau } => write!(f, "apl:tau={tau}"),
            ScoreFamily::Expectile { tau, phi } => write!(f, "expectile:tau={tau}:phi={phi}"),
            ScoreFamily::Bregman { phi } => write!(f, "bregman:phi={phi}"),
            other => f.write_str(other.name()),
        }
    }
}

impl fmt::Display for ScoreSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        self.transform.write_suffix(f)
    }
}

impl FromStr for ScoreFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, pairs) = split_params(s.trim())?;
        let family = match name {
            "se" | "ae" | "mv" => {
                Params::new(name, pairs, &[])?;
                match name {
                    "se" => ScoreFamily::Se,
                    "ae" => ScoreFamily::Ae,
                    _ => ScoreFamily::MeanVariance,
                }
            }
            "gpl" => {
                let p = Params::new(name, pairs, &["tau", "g"])?;
                ScoreFamily::Gpl {
                    tau: p.number("tau")?,
                    g: p.get("g")?.unwrap_or(Bijection::Identity),
                }
            }
            "apl" => ScoreFamily::Apl {
                tau: Params::new(name, pairs, &["tau"])?.number("tau")?,
            },
            "expectile" => {
                let p = Params::new(name, pairs, &["tau", "phi"])?;
                ScoreFamily::Expectile {
                    tau: p.number("tau")?,
                    phi: p.get("phi")?.unwrap_or(ConvexGenerator::Square),
                }
            }
            "bregman" => ScoreFamily::Bregman {
                phi: Params::new(name, pairs, &["phi"])?
                    .get("phi")?
                    .unwrap_or(ConvexGenerator::Square),
            },
            other => {
                return Err(Error::parse(format!(
                    "unknown score family `{other}` (expected one of {})",
                    ScoreFamily::NAMES.join(", ")
                )))
            }
        };
        family.validate()?;
        Ok(family)
    }
}

impl FromStr for ScoreSpec {
    type Err = Error;

    /// `family[:key=value...][@mode:bijection]`, e.g. `se@both:log` or
    /// `expectile:tau=0.75:phi=square@both:power(0.5)`.
    fn from_str(s: &str) -> Result<Self> {
        let (family, mode) = match s.split_once('@') {
            Some((f, m)) => (f, TransformMode::parse_suffix(m)?),
            None => (s, TransformMode::None),
        };
        ScoreSpec::new(family.parse()?, mode)
    }
}

impl Serialize for ScoreSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ScoreSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn spec(s: &str) -> ScoreSpec {
        s.parse().unwrap()
    }

    #[test]
    fn pointwise_values() {
        assert_eq!(spec("se").score(3.0, 1.0).unwrap(), 4.0);
        assert!((spec("apl:tau=0.9").score(1.0, 2.0).unwrap() - 0.9).abs() < 1e-15);
        assert!((spec("gpl:tau=0.5:g=log").score(E * E, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            spec("expectile:tau=0.75:phi=square")
                .score(2.0, 0.0)
                .unwrap(),
            1.0
        );
        assert!((spec("se@both:log").score(E, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(spec("mv").score_pair(0.0, 1.0, 0.0).unwrap(), -2.0);
        assert_eq!(spec("se@realization:log").score(0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn prediction_only_is_inverse_on_z() {
        // (log z - y)^2
        let s = spec("se@prediction:exp");
        assert!((s.score(E, 1.0).unwrap()).abs() < 1e-15);
        assert!(s.score(-1.0, 1.0).is_err());
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            spec("se@both:log").score(1.0, -1.0),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            spec("mv").score_pair(0.0, 0.0, 1.0),
            Err(Error::Domain { .. })
        ));
        assert!(spec("mv").score(0.0, 1.0).is_err());
        assert!("mv@both:log".parse::<ScoreSpec>().is_err());
        assert!("gpl:tau=0.5:g=negate".parse::<ScoreSpec>().is_err());
        assert!("apl:tau=0".parse::<ScoreSpec>().is_err());
    }

    #[test]
    fn averages() {
        assert_eq!(
            average_score_scalar(&spec("se"), &[1.0, 2.0], &[1.0, 4.0]).unwrap(),
            2.0
        );
        assert_eq!(
            average_score_scalar(&spec("ae"), &[1.5, -2.0], &[1.5, -2.0]).unwrap(),
            0.0
        );
        assert_eq!(
            average_score_scalar(&spec("apl:tau=0.5"), &[0.0, 0.0], &[-1.0, 1.0]).unwrap(),
            0.5
        );
        assert!(matches!(
            average_score_scalar(&spec("se"), &[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            average_score_scalar(&spec("se@both:log"), &[1.0, 1.0], &[1.0, -2.0]),
            Err(Error::AtIndex { index: 1, .. })
        ));
    }

    #[test]
    fn homogeneity_orders() {
        let sample = [(1.0, 2.0), (3.0, 0.5), (0.7, 4.0)];
        let probe = |s: &str| {
            homogeneity_probe(&spec(s), &[0.0, 1.0, 2.0], &[0.5, 2.0, 3.0, -1.0], &sample).unwrap()
        };
        assert_eq!(probe("se").order, Some(2.0));
        assert_eq!(probe("apl:tau=0.3").order, Some(1.0));
        let r = probe("gpl:tau=0.3:g=log");
        assert_eq!(r.order, Some(0.0));
        assert_eq!(r.skipped, vec![-1.0]);
        assert_eq!(probe("se@both:exp").order, None);
    }

    #[test]
    fn text_roundtrip() {
        for s in [
            "se",
            "ae",
            "mv",
            "se@both:log",
            "gpl:tau=0.9:g=log",
            "apl:tau=0.25@both:negate",
            "expectile:tau=0.75:phi=square@both:power(0.5)",
            "bregman:phi=neglog",
            "mv@realization:log",
            "se@prediction:exp",
        ] {
            assert_eq!(spec(s).to_string(), s);
        }
        assert!("se@sideways:log".parse::<ScoreSpec>().is_err());
        assert!("se@both".parse::<ScoreSpec>().is_err());
        assert!("foo".parse::<ScoreSpec>().is_err());
    }

    #[test]
    fn derivative_matches_difference() {
        for s in [
            "se",
            "se@both:log",
            "expectile:tau=0.3:phi=exp",
            "bregman:phi=xlogx",
            "gpl:tau=0.2:g=log",
            "se@prediction:exp",
        ] {
            let sp = spec(s);
            let (z, y) = (1.7, 0.6);
            let d = sp.score_dz(z, y).unwrap().unwrap();
            let h = 1e-6;
            let fd = (sp.score(z + h, y).unwrap() - sp.score(z - h, y).unwrap()) / (2.0 * h);
            assert!((d - fd).abs() < 1e-6 * d.abs().max(1.0), "{s}: {d} vs {fd}");
        }
    }

    #[test]
    fn generator_convexity_gap() {
        for g in ConvexGenerator::BUILTIN {
            for &(z, y) in &[(0.5, 2.0), (3.0, 0.1), (1.0, 1.0), (0.2, 0.3)] {
                assert!(g.gap(z, y) >= -1e-15, "{g}");
                assert!(g.d2phi(z).unwrap() >= 0.0);
            }
        }
    }
}
