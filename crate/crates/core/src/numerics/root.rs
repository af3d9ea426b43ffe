use super::Bracket;
use crate::error::{Error, Result};

const MAX_ITER: usize = 400;

/// Root of `f` in `bracket` by bisection; `|z - root| <= tol`.
///
/// `f(lo)` and `f(hi)` must have opposite signs (or one of them be zero).
pub fn root1d<F>(mut f: F, bracket: Bracket, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_root1d(|z| Ok(f(z)), bracket, tol)
}

pub fn try_root1d<F>(mut f: F, bracket: Bracket, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be > 0, got {tol}"
        )));
    }
    let mut eval = |z: f64| -> Result<f64> {
        let v = f(z)?;
        if v.is_nan() {
            Err(Error::Evaluation { at: z, value: v })
        } else {
            Ok(v)
        }
    };

    let (mut lo, mut hi) = (bracket.lo(), bracket.hi());
    let f_lo = eval(lo)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let f_hi = eval(hi)?;
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::Bracketing { lo, hi, f_lo, f_hi });
    }
    let lo_negative = f_lo < 0.0;

    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 2.0 * tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let fm = eval(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
