//! M-estimation: parameters minimizing a realized average score.
//!
//! Constant models use the bracketed 1-D minimizer (pinball objectives have
//! kinks); linear and (mean, variance) models use a simplex search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{nelder_mead, root1d, try_minimize1d, Bracket, SimplexOptions};
use crate::scoring::{ScoreSpec, TransformMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelSpec {
    /// `m(x, theta) = theta`
    Constant,
    /// `m(x, theta) = theta0 + theta1 x`
    Linear,
    /// `m(x, theta) = (theta1, theta2)` with `theta2 > 0`, for the
    /// mean-variance score.
    #[serde(rename = "mvpair")]
    ConstantPair,
}

impl std::str::FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "constant" => Ok(ModelSpec::Constant),
            "linear" => Ok(ModelSpec::Linear),
            "mvpair" => Ok(ModelSpec::ConstantPair),
            other => Err(Error::parse(format!(
                "unknown model `{other}` (expected constant, linear or mvpair)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub theta: Vec<f64>,
    /// Realized average score at `theta`.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `(1/l) sum S(m(x_i, theta), y_i)`.
///
/// `init = None` starts from least squares (linear) or the sample mean and
/// variance (pair); constant fits need no start. `tol` is the parameter
/// tolerance.
pub fn fit(
    model: ModelSpec,
    score: &ScoreSpec,
    x: Option<&[f64]>,
    y: &[f64],
    init: Option<&[f64]>,
    tol: f64,
) -> Result<FitResult> {
    if y.is_empty() {
        return Err(Error::EmptyData);
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    match (model, x) {
        (ModelSpec::Linear, None) => {
            return Err(Error::Precondition(
                "the linear model needs covariates x".into(),
            ))
        }
        (ModelSpec::Linear, Some(x)) if x.len() != y.len() => {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            })
        }
        (ModelSpec::Constant | ModelSpec::ConstantPair, Some(_)) => {
            return Err(Error::Precondition(format!(
                "the {model:?} model takes no covariates"
            )))
        }
        _ => {}
    }
    if score.is_pair() != (model == ModelSpec::ConstantPair) {
        return Err(Error::Precondition(format!(
            "score {score} is incompatible with the {model:?} model"
        )));
    }
    // realizations in the family's units, checked once with row numbers
    let w: Vec<f64> = y
        .iter()
        .enumerate()
        .map(|(i, &v)| score.prepare_y(v).map_err(|e| e.at_index(i)))
        .collect::<Result<_>>()?;
    match model {
        ModelSpec::Constant => fit_constant(score, y, &w, tol),
        ModelSpec::Linear => fit_linear(score, x.unwrap_or_default(), y, &w, init, tol),
        ModelSpec::ConstantPair => fit_pair(score, &w, init, tol),
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &t| {
            (lo.min(t), hi.max(t))
        })
}

/// Search interval for a constant prediction, in prediction units.
fn constant_bracket(score: &ScoreSpec, y: &[f64], w: &[f64]) -> Result<Bracket> {
    // range of the realizations as seen by the prediction
    let (lo, hi) = match score.transform {
        TransformMode::RealizationOnly(_) => min_max(w),
        TransformMode::PredictionOnly(g) => {
            let (a, b) = min_max(y);
            let (ga, gb) = (g.apply(a)?, g.apply(b)?);
            (ga.min(gb), ga.max(gb))
        }
        _ => min_max(y),
    };
    let pad = 0.01 * (hi - lo).max(1e-9 * lo.abs().max(hi.abs()).max(1.0));
    let domain = score.prediction_domain();
    let lo2 = if domain.contains(lo - pad) {
        lo - pad
    } else {
        lo
    };
    let hi2 = if domain.contains(hi + pad) {
        hi + pad
    } else {
        hi
    };
    if lo2 < hi2 {
        return Bracket::new(lo2, hi2);
    }
    // every realization equal and on a domain boundary
    Bracket::new(lo2, lo2 + pad)
}

fn fit_constant(score: &ScoreSpec, y: &[f64], w: &[f64], tol: f64) -> Result<FitResult> {
    let n = w.len() as f64;
    let objective = |z: f64| -> Result<f64> {
        let zc = score.prepare_z(z)?;
        Ok(w.iter().map(|&v| score.core(zc, v)).sum::<f64>() / n)
    };
    let bracket = constant_bracket(score, y, w)?;
    let scale = bracket.lo().abs().max(bracket.hi().abs()).max(1.0);
    let min = try_minimize1d(objective, bracket, tol.min(1e-8 * scale))?;
    let (mut z, mut value) = (min.x, min.value);

    // Brent stops near sqrt(eps); for smooth objectives the stationarity
    // condition pins the optimum down to rounding.
    let slope = |t: f64| -> f64 {
        let Ok(tc) = score.prepare_z(t) else {
            return f64::NAN;
        };
        let Ok(dz) = score.transform.map_z_slope(t) else {
            return f64::NAN;
        };
        w.iter()
            .map(|&v| score.core_dz(tc, v).unwrap_or(f64::NAN))
            .sum::<f64>()
            / n
            * dz
    };
    let reach = 1e-5 * scale;
    let polish = Bracket::new((z - reach).max(bracket.lo()), (z + reach).min(bracket.hi()))
        .and_then(|b| root1d(slope, b, 1e-15 * scale));
    if let Ok(root) = polish {
        if let Ok(v) = objective(root) {
            // at a smooth optimum the two values agree to rounding
            if v <= value + 4.0 * f64::EPSILON * value.abs() {
                z = root;
                value = v;
            }
        }
    }

    // piecewise-linear objectives are minimized at a kink; land on it exactly
    if score.family.has_indicator() {
        let kink = |v: f64, raw: f64| match score.transform {
            TransformMode::RealizationOnly(_) => Ok(v),
            TransformMode::PredictionOnly(g) => g.apply(raw),
            _ => Ok(raw),
        };
        let mut nearest: Option<f64> = None;
        for (&v, &raw) in w.iter().zip(y) {
            let k = kink(v, raw)?;
            if nearest.is_none_or(|b| (k - z).abs() < (b - z).abs()) {
                nearest = Some(k);
            }
        }
        if let Some(k) = nearest {
            if let Ok(v) = objective(k) {
                if v <= value + 4.0 * f64::EPSILON * value.abs() {
                    z = k;
                    value = v;
                }
            }
        }
    }
    Ok(FitResult {
        theta: vec![z],
        objective: value,
        iterations: min.iterations,
        converged: true,
    })
}

fn least_squares(x: &[f64], y: &[f64]) -> [f64; 2] {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    [my - slope * mx, slope]
}

/// Simplex search with one restart from the reported point when the first
/// run does not converge.
fn simplex_with_restart<F>(mut f: F, x0: &[f64], tol: f64) -> Result<FitResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let opts = SimplexOptions {
        x_tol: tol,
        f_tol: 1e-15,
        max_iter: 20_000,
        ..SimplexOptions::default()
    };
    let first = nelder_mead(&mut f, x0, opts)?;
    let mut iterations = first.iterations;
    let result = if first.converged {
        first
    } else {
        let second = nelder_mead(&mut f, &first.x, opts)?;
        iterations += second.iterations;
        second
    };
    Ok(FitResult {
        theta: result.x,
        objective: result.value,
        iterations,
        converged: result.converged,
    })
}

fn fit_linear(
    score: &ScoreSpec,
    x: &[f64],
    y: &[f64],
    w: &[f64],
    init: Option<&[f64]>,
    tol: f64,
) -> Result<FitResult> {
    let start = match init {
        Some(v) if v.len() == 2 => [v[0], v[1]],
        Some(v) => {
            return Err(Error::InvalidInput(format!(
                "the linear model has 2 parameters, got {} initial values",
                v.len()
            )))
        }
        None => least_squares(x, y),
    };
    let n = w.len() as f64;
    let objective = |theta: &[f64]| -> Result<f64> {
        let mut total = 0.0;
        for (&xi, &wi) in x.iter().zip(w) {
            match score.prepare_z(theta[0] + theta[1] * xi) {
                Ok(zc) => total += score.core(zc, wi),
                // outside the prediction domain: infeasible
                Err(_) => return Ok(f64::NAN),
            }
        }
        Ok(total / n)
    };
    simplex_with_restart(objective, &start, tol)
}

fn fit_pair(score: &ScoreSpec, w: &[f64], init: Option<&[f64]>, tol: f64) -> Result<FitResult> {
    let n = w.len() as f64;
    let start = match init {
        Some(v) if v.len() == 2 => {
            if !(v[1] > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "initial variance must be > 0, got {}",
                    v[1]
                )));
            }
            [v[0], v[1]]
        }
        Some(v) => {
            return Err(Error::InvalidInput(format!(
                "the pair model has 2 parameters, got {} initial values",
                v.len()
            )))
        }
        None => {
            let mean = w.iter().sum::<f64>() / n;
            let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            // a degenerate sample still needs a positive start
            [mean, if var > 0.0 { var } else { 1.0 }]
        }
    };
    // positivity is structural: search over (theta1, log theta2)
    let objective = |p: &[f64]| -> Result<f64> {
        let x2 = p[1].exp();
        Ok(w.iter().map(|&v| score.core_pair(p[0], x2, v)).sum::<f64>() / n)
    };
    let mut result = simplex_with_restart(objective, &[start[0], start[1].ln()], tol)?;
    result.theta[1] = result.theta[1].exp();
    Ok(result)
}
