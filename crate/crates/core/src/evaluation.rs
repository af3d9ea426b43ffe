//! Realized skill scores and climatological reference predictions.

use crate::error::{Error, Result};
use crate::scoring::{average_score, Prediction, ScoreFamily, ScoreSpec};
use crate::transforms::Bijection;

/// Optimum used in the skill-score denominator.
#[derive(Debug, Clone, PartialEq)]
pub enum Optimum<'a> {
    /// Predictions attaining the best possible score.
    Predictions(&'a [Prediction]),
    /// The family attains 0 at a perfect prediction.
    ZeroOptimum,
}

/// `(S(z) - S(ref)) / (S(opt) - S(ref))`, or `1 - S(z)/S(ref)` for a
/// zero-optimum family.
pub fn skill_score(
    score: &ScoreSpec,
    z: &[Prediction],
    z_ref: &[Prediction],
    z_opt: Optimum<'_>,
    y: &[f64],
) -> Result<f64> {
    let s_z = average_score(score, z, y)?;
    let s_ref = average_score(score, z_ref, y)?;
    match z_opt {
        Optimum::Predictions(opt) => {
            let s_opt = average_score(score, opt, y)?;
            let denom = s_opt - s_ref;
            if denom == 0.0 {
                return Err(Error::DegenerateReference(
                    "reference and optimum have equal average scores".into(),
                ));
            }
            Ok((s_z - s_ref) / denom)
        }
        Optimum::ZeroOptimum => {
            if matches!(score.family, ScoreFamily::MeanVariance) {
                return Err(Error::Precondition(
                    "the mean-variance score has no zero optimum".into(),
                ));
            }
            if s_ref == 0.0 {
                return Err(Error::DegenerateReference(
                    "reference average score is 0".into(),
                ));
            }
            Ok(1.0 - s_z / s_ref)
        }
    }
}

/// [`skill_score`] for scalar predictions with the zero optimum.
pub fn skill_score_zero(score: &ScoreSpec, z: &[f64], z_ref: &[f64], y: &[f64]) -> Result<f64> {
    let wrap = |v: &[f64]| v.iter().map(|&t| Prediction::Scalar(t)).collect::<Vec<_>>();
    skill_score(score, &wrap(z), &wrap(z_ref), Optimum::ZeroOptimum, y)
}

/// Nash-Sutcliffe efficiency: squared-error skill against the sample mean.
pub fn nse(z: &[f64], y: &[f64]) -> Result<f64> {
    if z.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: z.len(),
            right: y.len(),
        });
    }
    if y.len() < 2 {
        return Err(Error::Precondition(
            "NSE needs at least 2 observations".into(),
        ));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let reference = vec![mean; y.len()];
    let se = ScoreSpec::plain(ScoreFamily::Se)?;
    skill_score_zero(&se, z, &reference, y).map_err(|e| match e {
        Error::DegenerateReference(_) => {
            Error::DegenerateReference("observations are constant".into())
        }
        other => other,
    })
}

/// `g^{-1}(mean of g(y_i))`, the climatology of the `g`-transformed mean.
pub fn transformed_climatology(g: &Bijection, y: &[f64]) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut total = 0.0;
    for (i, &v) in y.iter().enumerate() {
        total += g.apply(v).map_err(|e| e.at_index(i))?;
    }
    g.invert(total / y.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn se() -> ScoreSpec {
        "se".parse().unwrap()
    }

    #[test]
    fn skill_examples() {
        let y = [0.0, 2.0];
        assert_eq!(skill_score_zero(&se(), &y, &[1.0, 1.0], &y).unwrap(), 1.0);
        assert_eq!(
            skill_score_zero(&se(), &[1.0, 1.0], &[1.0, 1.0], &y).unwrap(),
            0.0
        );
        assert_eq!(
            skill_score_zero(&se(), &[0.0, 1.0], &[1.0, 1.0], &y).unwrap(),
            0.5
        );
    }

    #[test]
    fn general_form_matches_zero_optimum() {
        let y = [0.5, 1.5, 3.0];
        let p = |v: &[f64]| v.iter().map(|&t| Prediction::Scalar(t)).collect::<Vec<_>>();
        let z = p(&[0.7, 1.0, 2.0]);
        let r = p(&[1.0, 1.0, 1.0]);
        let opt = p(&y);
        let a = skill_score(&se(), &z, &r, Optimum::Predictions(&opt), &y).unwrap();
        let b = skill_score(&se(), &z, &r, Optimum::ZeroOptimum, &y).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn degenerate_references() {
        let y = [1.0, 2.0];
        assert!(matches!(
            skill_score_zero(&se(), &[0.0, 0.0], &y, &y),
            Err(Error::DegenerateReference(_))
        ));
        assert!(matches!(
            nse(&[1.0, 2.0], &[3.0, 3.0]),
            Err(Error::DegenerateReference(_))
        ));
        let p = [Prediction::Scalar(1.0), Prediction::Scalar(1.0)];
        assert!(matches!(
            skill_score(&se(), &p, &p, Optimum::Predictions(&p), &y),
            Err(Error::DegenerateReference(_))
        ));
    }

    #[test]
    fn nse_examples() {
        let y = [0.0, 2.0];
        assert_eq!(nse(&y, &y).unwrap(), 1.0);
        assert_eq!(nse(&[1.0, 1.0], &y).unwrap(), 0.0);
        assert!(nse(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn climatologies() {
        assert_eq!(
            transformed_climatology(&Bijection::Identity, &[1.0, 2.0, 3.0]).unwrap(),
            2.0
        );
        assert_eq!(
            transformed_climatology(&Bijection::Log, &[1.0, 4.0]).unwrap(),
            2.0
        );
        let rms = transformed_climatology(&Bijection::Power { a: 2.0 }, &[3.0, 4.0]).unwrap();
        assert!((rms - 12.5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(
            transformed_climatology(&Bijection::Log, &[1.0, -1.0]),
            Err(Error::AtIndex { index: 1, .. })
        ));
    }

    #[test]
    fn transformed_climatology_has_zero_skill() {
        let y = [0.5, 2.0, 3.5, 1.0];
        let g = Bijection::Log;
        let c = transformed_climatology(&g, &y).unwrap();
        let s: ScoreSpec = "se@both:log".parse().unwrap();
        let reference = vec![c; y.len()];
        assert_eq!(
            skill_score_zero(&s, &reference, &reference, &y).unwrap(),
            0.0
        );
    }
}
