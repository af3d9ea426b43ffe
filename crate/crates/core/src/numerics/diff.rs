use crate::error::{Error, Result};

/// Default central-difference step, `1e-6 * max(1, |z|)`.
pub fn default_step(z: f64) -> f64 {
    1e-6 * z.abs().max(1.0)
}

/// Symmetric difference quotient `(f(z + h) - f(z - h)) / 2h`.
pub fn central_diff<F>(mut f: F, z: f64, step: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!("step must be > 0, got {step}")));
    }
    let up = f(z + step);
    if !up.is_finite() {
        return Err(Error::Evaluation {
            at: z + step,
            value: up,
        });
    }
    let down = f(z - step);
    if !down.is_finite() {
        return Err(Error::Evaluation {
            at: z - step,
            value: down,
        });
    }
    Ok((up - down) / (2.0 * step))
}
