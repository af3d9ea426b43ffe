//! Strict identification functions `V(z, y)`, orientation probes and the
//! Osband link `dS/dz = h(z) V(z, y)` between scores and identification
//! functions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::functionals::{check_tau, split_params, Params};
use crate::numerics::{central_diff, default_step, Seed, Welford};
use crate::scoring::{check_variance, Prediction, ScoreFamily, ScoreSpec, TransformMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IdentFamily {
    /// `z - y`
    Mean,
    /// `1{z >= y} - tau`
    Quantile { tau: f64 },
    /// `2 |1{z >= y} - tau| (z - y)`
    Expectile { tau: f64 },
    /// `(x1 - y, x2 + x1^2 - y^2)`
    MeanVariance,
}

impl IdentFamily {
    pub const NAMES: [&'static str; 4] = ["mean", "quantile", "expectile", "mv"];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentSpec {
    pub family: IdentFamily,
    pub transform: TransformMode,
}

/// Value of an identification function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IdentValue {
    Scalar(f64),
    Pair(f64, f64),
}

impl IdentSpec {
    pub fn new(family: IdentFamily, transform: TransformMode) -> Result<Self> {
        let spec = IdentSpec { family, transform };
        spec.validate()?;
        Ok(spec)
    }

    pub fn plain(family: IdentFamily) -> Result<Self> {
        IdentSpec::new(family, TransformMode::None)
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            IdentFamily::Quantile { tau } | IdentFamily::Expectile { tau } => check_tau(tau)?,
            IdentFamily::MeanVariance => {
                if matches!(
                    self.transform,
                    TransformMode::Both(_) | TransformMode::PredictionOnly(_)
                ) {
                    return Err(Error::parameter(
                        "mv",
                        "the mean-variance identification admits only no transform or a realization transform",
                    ));
                }
            }
            IdentFamily::Mean => {}
        }
        Ok(())
    }

    pub fn is_pair(&self) -> bool {
        matches!(self.family, IdentFamily::MeanVariance)
    }

    /// `+1` when `E[V(z, Y)]` increases through the functional, `-1` when a
    /// decreasing bijection on the prediction flips it. `None` for pairs.
    pub fn orientation(&self) -> Option<f64> {
        (!self.is_pair()).then(|| self.transform.orientation())
    }

    #[inline]
    pub fn prepare_y(&self, y: f64) -> Result<f64> {
        self.transform.map_y(y)
    }

    #[inline]
    pub fn prepare_z(&self, z: f64) -> Result<f64> {
        self.transform.map_z(z)
    }

    /// The untransformed scalar family at prepared arguments.
    #[inline]
    pub fn core(&self, z: f64, y: f64) -> f64 {
        let hit = if z >= y { 1.0 } else { 0.0 };
        match self.family {
            IdentFamily::Mean => z - y,
            IdentFamily::Quantile { tau } => hit - tau,
            IdentFamily::Expectile { tau } => 2.0 * (hit - tau).abs() * (z - y),
            IdentFamily::MeanVariance => {
                panic!("mean-variance identification needs a pair prediction")
            }
        }
    }

    #[inline]
    pub fn core_pair(&self, x1: f64, x2: f64, y: f64) -> (f64, f64) {
        (x1 - y, x2 + x1 * x1 - y * y)
    }

    pub fn value(&self, z: f64, y: f64) -> Result<f64> {
        if self.is_pair() {
            return Err(Error::InvalidInput(format!(
                "{self} needs a (mean, variance) prediction"
            )));
        }
        Ok(self.core(self.prepare_z(z)?, self.prepare_y(y)?))
    }

    pub fn value_pair(&self, x1: f64, x2: f64, y: f64) -> Result<(f64, f64)> {
        if !self.is_pair() {
            return Err(Error::InvalidInput(format!(
                "{self} takes scalar predictions"
            )));
        }
        check_variance(x2)?;
        Ok(self.core_pair(x1, x2, self.prepare_y(y)?))
    }
}

/// `V(z, y)` for any prediction shape.
pub fn evaluate_identification(spec: &IdentSpec, z: Prediction, y: f64) -> Result<IdentValue> {
    match z {
        Prediction::Scalar(z) => spec.value(z, y).map(IdentValue::Scalar),
        Prediction::Pair(x1, x2) => spec
            .value_pair(x1, x2, y)
            .map(|(a, b)| IdentValue::Pair(a, b)),
    }
}

/// `E[V(z, Y)]` at one offset from the functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OffsetProbe {
    pub offset: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrientationReport {
    pub orientation: f64,
    pub probes: Vec<OffsetProbe>,
    pub pass: bool,
}

/// Checks that `E[V(t + d, Y)]` has the sign of `orientation * d` and is
/// more than three standard errors from zero, for each offset `d`.
pub fn orientation_probe(
    spec: &IdentSpec,
    dist: &DistributionSpec,
    functional_value: f64,
    offsets: &[f64],
    n: usize,
    seed: Seed,
) -> Result<OrientationReport> {
    let orientation = spec.orientation().ok_or_else(|| {
        Error::Precondition(
            "orientation is defined for scalar identification functions only".into(),
        )
    })?;
    if offsets.iter().any(|&d| d == 0.0 || !d.is_finite()) {
        return Err(Error::Precondition(
            "offsets must be finite and nonzero".into(),
        ));
    }
    let (points, _) = dist.expectation_points(n, seed)?;
    let ys = points
        .iter()
        .enumerate()
        .map(|(i, &y)| spec.prepare_y(y).map_err(|e| e.at_index(i)))
        .collect::<Result<Vec<_>>>()?;
    let mut probes = Vec::with_capacity(offsets.len());
    for &offset in offsets {
        let zc = spec.prepare_z(functional_value + offset)?;
        let mut acc = Welford::default();
        ys.iter().for_each(|&y| acc.push(spec.core(zc, y)));
        let est = acc.estimate();
        let signed = orientation * offset.signum() * est.value;
        probes.push(OffsetProbe {
            offset,
            estimate: est.value,
            stderr: est.stderr,
            ok: signed > 0.0 && signed > 3.0 * est.stderr,
        });
    }
    let pass = probes.iter().all(|p| p.ok);
    Ok(OrientationReport {
        orientation,
        probes,
        pass,
    })
}

/// Result of an Osband residual computation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OsbandOutcome {
    /// Largest `|dS/dz - h(z) V(z, y)|` over the points.
    Residual(f64),
    /// The pairing needs `phi''`, which the generator does not provide.
    NotApplicable(String),
}

type Weight = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// The built-in `h` linking `score` to `ident`, `Ok(None)` when it would
/// need a missing `phi''`.
///
/// Pairings: SE with mean (`h = 2`), SE and mean both under the same `g`
/// (`h = 2 g'`), Bregman with mean (`h = phi''/2`), GPL with quantile
/// (`h = g'`), expectile score with expectile (`h = phi''/2`).
pub fn osband_weight(score: &ScoreSpec, ident: &IdentSpec) -> Result<Option<Weight>> {
    use IdentFamily as I;
    use ScoreFamily as S;
    use TransformMode as M;
    let unsupported =
        || Error::Precondition(format!("no built-in Osband pairing for ({score}, {ident})"));
    let h: Weight = match (score.family, score.transform, ident.family, ident.transform) {
        (S::Se, M::None, I::Mean, M::None) => Box::new(|_| 2.0),
        (S::Se, M::Both(g), I::Mean, M::Both(g2)) if g == g2 => {
            Box::new(move |z| 2.0 * g.derivative_unchecked(z))
        }
        (S::Bregman { phi }, M::None, I::Mean, M::None) => {
            if phi.d2phi(1.0).is_none() {
                return Ok(None);
            }
            Box::new(move |z| 0.5 * phi.d2phi(z).unwrap_or(f64::NAN))
        }
        (S::Gpl { tau, g }, M::None, I::Quantile { tau: t2 }, M::None) if tau == t2 => {
            Box::new(move |z| g.derivative_unchecked(z))
        }
        (S::Expectile { tau, phi }, M::None, I::Expectile { tau: t2 }, M::None) if tau == t2 => {
            if phi.d2phi(1.0).is_none() {
                return Ok(None);
            }
            Box::new(move |z| 0.5 * phi.d2phi(z).unwrap_or(f64::NAN))
        }
        _ => return Err(unsupported()),
    };
    Ok(Some(h))
}

/// `max |central_diff(S(., y), z) - h(z) V(z, y)|` over `points`.
///
/// Points with `|z - y| < 1e-6 max(1, |y|)` sit on a kink and are rejected.
/// `step = None` uses [`default_step`].
pub fn osband_residual(
    score: &ScoreSpec,
    ident: &IdentSpec,
    h: &dyn Fn(f64) -> f64,
    points: &[(f64, f64)],
    step: Option<f64>,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for (i, &(z, y)) in points.iter().enumerate() {
        if (z - y).abs() < 1e-6 * y.abs().max(1.0) {
            return Err(Error::Precondition(format!(
                "point {i} (z = {z}, y = {y}) is on the kink z = y"
            )));
        }
        score.score(z, y).map_err(|e| e.at_index(i))?;
        let h_step = step.unwrap_or_else(|| default_step(z));
        let slope = central_diff(|t| score.score(t, y).unwrap_or(f64::NAN), z, h_step)
            .map_err(|e| e.at_index(i))?;
        let v = ident.value(z, y).map_err(|e| e.at_index(i))?;
        worst = worst.max((slope - h(z) * v).abs());
    }
    Ok(worst)
}

/// [`osband_residual`] with the built-in weight for the pairing.
pub fn osband_check(
    score: &ScoreSpec,
    ident: &IdentSpec,
    points: &[(f64, f64)],
    step: Option<f64>,
) -> Result<OsbandOutcome> {
    match osband_weight(score, ident)? {
        Some(h) => osband_residual(score, ident, &*h, points, step).map(OsbandOutcome::Residual),
        None => Ok(OsbandOutcome::NotApplicable(format!(
            "{score}: the convex generator has no second derivative"
        ))),
    }
}

impl fmt::Display for IdentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            IdentFamily::Mean => f.write_str("mean")?,
            IdentFamily::Quantile { tau } => write!(f, "quantile:tau={tau}")?,
            IdentFamily::Expectile { tau } => write!(f, "expectile:tau={tau}")?,
            IdentFamily::MeanVariance => f.write_str("mv")?,
        }
        match self.transform {
            TransformMode::None => Ok(()),
            TransformMode::RealizationOnly(g) => write!(f, "@realization:{g}"),
            TransformMode::PredictionOnly(g) => write!(f, "@prediction:{g}"),
            TransformMode::Both(g) => write!(f, "@both:{g}"),
        }
    }
}

impl FromStr for IdentSpec {
    type Err = Error;

    /// `family[:tau=...][@mode:bijection]`, e.g. `mean@both:log`.
    fn from_str(s: &str) -> Result<Self> {
        let (family, mode) = match s.split_once('@') {
            Some((f, m)) => (f, TransformMode::parse_suffix(m)?),
            None => (s, TransformMode::None),
        };
        let (name, pairs) = split_params(family.trim())?;
        let family = match name {
            "mean" => {
                Params::new(name, pairs, &[])?;
                IdentFamily::Mean
            }
            "mv" => {
                Params::new(name, pairs, &[])?;
                IdentFamily::MeanVariance
            }
            "quantile" => IdentFamily::Quantile {
                tau: Params::new(name, pairs, &["tau"])?.number("tau")?,
            },
            "expectile" => IdentFamily::Expectile {
                tau: Params::new(name, pairs, &["tau"])?.number("tau")?,
            },
            other => {
                return Err(Error::parse(format!(
                    "unknown identification family `{other}` (expected one of {})",
                    IdentFamily::NAMES.join(", ")
                )))
            }
        };
        IdentSpec::new(family, mode)
    }
}

impl Serialize for IdentSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IdentSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ident(s: &str) -> IdentSpec {
        s.parse().unwrap()
    }

    fn score(s: &str) -> ScoreSpec {
        s.parse().unwrap()
    }

    #[test]
    fn pointwise_values() {
        assert_eq!(ident("mean").value(2.0, 5.0).unwrap(), -3.0);
        let q = ident("quantile:tau=0.5@both:exp").value(1.0, 3.0).unwrap();
        assert_eq!(q, -0.5);
        assert_eq!(q, ident("quantile:tau=0.5").value(1.0, 3.0).unwrap());
        assert_eq!(ident("expectile:tau=0.75").value(2.0, 0.0).unwrap(), 1.0);
        assert_eq!(
            ident("mv@realization:identity")
                .value_pair(0.0, 1.0, 1.0)
                .unwrap(),
            (-1.0, 0.0)
        );
    }

    #[test]
    fn orientation_flags() {
        assert_eq!(ident("mean").orientation(), Some(1.0));
        assert_eq!(
            ident("quantile:tau=0.25@both:negate").orientation(),
            Some(-1.0)
        );
        assert_eq!(ident("mean@realization:negate").orientation(), Some(1.0));
        assert_eq!(ident("mv").orientation(), None);
    }

    #[test]
    fn orientation_on_normal_mean() {
        let d = DistributionSpec::normal(0.0, 1.0).unwrap();
        let r = orientation_probe(&ident("mean"), &d, 0.0, &[1.0, -1.0], 100_000, Seed(1)).unwrap();
        assert!(r.pass);
        assert!((r.probes[0].estimate - 1.0).abs() < 0.02);
    }

    #[test]
    fn orientation_median_exponential() {
        let d = DistributionSpec::exponential(1.0).unwrap();
        let r = orientation_probe(
            &ident("quantile:tau=0.5"),
            &d,
            2f64.ln(),
            &[0.5, -0.5],
            100_000,
            Seed(2),
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
        // oracle: F(t + d) - 1/2
        for p in &r.probes {
            let truth = 0.5 - (-(2f64.ln() + p.offset)).exp();
            assert!((p.estimate - truth).abs() <= 3.0 * p.stderr + 1e-12);
        }
    }

    #[test]
    fn orientation_of_log_mean() {
        let d = DistributionSpec::lognormal(0.0, 1.0).unwrap();
        let r = orientation_probe(
            &ident("mean@both:log"),
            &d,
            1.0,
            &[0.5, -0.5],
            100_000,
            Seed(3),
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn orientation_rejects_pairs_and_zero_offsets() {
        let d = DistributionSpec::normal(0.0, 1.0).unwrap();
        assert!(orientation_probe(&ident("mv"), &d, 0.0, &[1.0], 100, Seed(1)).is_err());
        assert!(orientation_probe(&ident("mean"), &d, 0.0, &[0.0], 100, Seed(1)).is_err());
    }

    #[test]
    fn osband_examples() {
        let r = |s: &str, v: &str, z: f64, y: f64| match osband_check(
            &score(s),
            &ident(v),
            &[(z, y)],
            None,
        )
        .unwrap()
        {
            OsbandOutcome::Residual(r) => r,
            other => panic!("{other:?}"),
        };
        assert!(r("se", "mean", 3.0, 1.0) <= 1e-6);
        assert!(r("se@both:log", "mean@both:log", 2.0, 1.0) <= 1e-6);
        assert!(r("gpl:tau=0.9:g=log", "quantile:tau=0.9", 2.0, 5.0) <= 1e-6);
        assert!(r("bregman:phi=exp", "mean", 0.3, 1.2) <= 1e-6);
        assert!(
            r(
                "expectile:tau=0.2:phi=neglog",
                "expectile:tau=0.2",
                0.8,
                2.5
            ) <= 1e-6
        );
    }

    #[test]
    fn osband_rejects_kinks_and_mismatches() {
        let err = osband_check(
            &score("apl:tau=0.5"),
            &ident("quantile:tau=0.5"),
            &[(1.0, 1.0)],
            None,
        );
        assert!(err.is_err());
        let err = osband_check(
            &score("gpl:tau=0.5"),
            &ident("quantile:tau=0.5"),
            &[(1.0, 1.0)],
            None,
        );
        assert!(matches!(err, Err(Error::Precondition(_))));
        assert!(osband_check(
            &score("se"),
            &ident("quantile:tau=0.5"),
            &[(1.0, 2.0)],
            None
        )
        .is_err());
    }

    #[test]
    fn osband_without_second_derivative() {
        use crate::scoring::{ConvexGenerator, CustomGenerator};
        use crate::transforms::Interval;
        let quartic = ConvexGenerator::Custom(CustomGenerator {
            name: "quartic",
            phi: |t| t.powi(4),
            dphi: |t| 4.0 * t.powi(3),
            d2phi: None,
            domain: Interval::REAL,
            strictly_convex: true,
        });
        let s = ScoreSpec::plain(ScoreFamily::Bregman { phi: quartic }).unwrap();
        let out = osband_check(&s, &ident("mean"), &[(1.0, 2.0)], None).unwrap();
        assert!(matches!(out, OsbandOutcome::NotApplicable(_)));
    }

    #[test]
    fn text_roundtrip() {
        for s in [
            "mean",
            "mean@both:log",
            "quantile:tau=0.9",
            "expectile:tau=0.75@both:log",
            "mv@realization:log",
        ] {
            assert_eq!(ident(s).to_string(), s);
        }
        assert!("mv@both:log".parse::<IdentSpec>().is_err());
        assert!("median".parse::<IdentSpec>().is_err());
    }
}
