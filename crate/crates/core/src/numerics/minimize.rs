use super::Bracket;
use crate::error::{Error, Result};

/// (3 - sqrt(5)) / 2
const GOLDEN: f64 = 0.381_966_011_250_105_1;
const MAX_ITER: usize = 500;

/// Outcome of a bracketed 1-D minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Minimizes a unimodal `f` on `bracket`, returning `z` with
/// `|z - argmin f| <= tol`.
///
/// Brent's method: parabolic interpolation when it is trustworthy, golden
/// section otherwise. No derivatives are used, so kinked objectives are fine.
pub fn minimize1d<F>(mut f: F, bracket: Bracket, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_minimize1d(|z| Ok(f(z)), bracket, tol).map(|m| m.x)
}

/// Fallible variant of [`minimize1d`] that also reports the attained value.
pub fn try_minimize1d<F>(mut f: F, bracket: Bracket, tol: f64) -> Result<Minimum>
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
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { at: z, value: v })
        }
    };

    let (mut a, mut b) = (bracket.lo(), bracket.hi());
    let mut x = a + GOLDEN * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = eval(x)?;
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0f64, 0.0f64);

    for iter in 0..MAX_ITER {
        let m = 0.5 * (a + b);
        let tol1 = 0.5 * tol + 4.0 * f64::EPSILON * x.abs();
        let tol2 = 2.0 * tol1;
        // max(x - a, b - x) <= tol2 <= tol (up to rounding)
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            return Ok(Minimum {
                x,
                value: fx,
                iterations: iter,
            });
        }

        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            } else {
                q = -q;
            }
            let e_prev = e;
            e = d;
            if p.abs() < (0.5 * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = GOLDEN * e;
        }

        let u = if d.abs() >= tol1 {
            x + d
        } else if d > 0.0 {
            x + tol1
        } else {
            x - tol1
        };
        let fu = eval(u)?;

        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }

    Ok(Minimum {
        x,
        value: fx,
        iterations: MAX_ITER,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn br(lo: f64, hi: f64) -> Bracket {
        Bracket::new(lo, hi).unwrap()
    }

    #[test]
    fn quadratic_vertex() {
        let z = minimize1d(|z| (z - 3.0).powi(2), br(0.0, 10.0), 1e-8).unwrap();
        assert!((z - 3.0).abs() <= 1e-8, "{z}");
    }

    #[test]
    fn kink_minimum() {
        let z = minimize1d(|z| (z - 1.0).abs(), br(-5.0, 5.0), 1e-8).unwrap();
        assert!((z - 1.0).abs() <= 1e-8, "{z}");
    }

    #[test]
    fn log_square() {
        let z = minimize1d(|z: f64| z.ln().powi(2), br(0.1, 10.0), 1e-8).unwrap();
        assert!((z - 1.0).abs() <= 1e-6, "{z}");
    }

    #[test]
    fn pinball_objective() {
        // n * tau = 8.1 is not an integer, so the minimizer is the 9th order statistic
        let ys: Vec<f64> = (1..=9).map(f64::from).collect();
        let obj = |z: f64| {
            ys.iter()
                .map(|&y| (if z >= y { 1.0 } else { 0.0 } - 0.9) * (z - y))
                .sum::<f64>()
        };
        let z = minimize1d(obj, br(0.0, 10.0), 1e-9).unwrap();
        assert!((z - 9.0).abs() <= 1e-8, "{z}");
    }

    #[test]
    fn nonfinite_is_evaluation_error() {
        let err =
            minimize1d(|z| if z > 0.5 { f64::NAN } else { z }, br(0.0, 1.0), 1e-6).unwrap_err();
        assert!(matches!(err, Error::Evaluation { .. }));
    }

    #[test]
    fn inverted_bracket_is_domain_error() {
        assert!(matches!(
            Bracket::new(2.0, 1.0).unwrap_err(),
            Error::InvalidInput(_)
        ));
        assert!(Bracket::new(1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn convex_quadratic(a in 0.1f64..10.0, vertex in -50.0f64..50.0, c in -5.0f64..5.0) {
            let b = -2.0 * a * vertex;
            let z = minimize1d(|z| a * z * z + b * z + c, br(vertex - 60.0, vertex + 75.0), 1e-7).unwrap();
            // the fp noise floor of a*z^2 near the vertex is ~sqrt(eps)*|vertex|
            prop_assert!((z - vertex).abs() <= 1e-7 + 2e-8 * vertex.abs().max(1.0), "{} vs {}", z, vertex);
        }
    }
}
