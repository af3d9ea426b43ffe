use crate::error::{Error, Result};

/// Settings for [`nelder_mead`].
#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Initial edge length along each axis (per coordinate, scaled by
    /// `max(1, |x0_i|)`).
    pub initial_step: f64,
    /// Converged when both the spread of vertex values and the simplex
    /// diameter fall below these.
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            initial_step: 0.05,
            f_tol: 1e-12,
            x_tol: 1e-10,
            max_iter: 5_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Derivative-free Nelder–Mead search (standard coefficients 1, 2, 1/2, 1/2).
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: SimplexOptions) -> Result<SimplexResult>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let dim = x0.len();
    if dim == 0 {
        return Err(Error::Precondition(
            "simplex search needs at least one parameter".into(),
        ));
    }
    let mut eval = |x: &[f64]| -> Result<f64> {
        let v = f(x)?;
        // infeasible points are rejected by treating them as +inf
        Ok(if v.is_nan() { f64::INFINITY } else { v })
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step * x0[i].abs().max(1.0);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect::<Result<_>>()?;
    if !values[0].is_finite() {
        return Err(Error::Evaluation {
            at: x0[0],
            value: values[0],
        });
    }

    let mut order: Vec<usize> = (0..=dim).collect();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let spread = values[worst] - values[best];
        let diameter = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread.abs() <= opts.f_tol * (1.0 + values[best].abs()) && diameter <= opts.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|k| order[..dim].iter().map(|&i| simplex[i][k]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[worst])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(1.0);
        let f_r = eval(&reflected)?;
        if f_r < values[best] {
            let expanded = along(2.0);
            let f_e = eval(&expanded)?;
            if f_e < f_r {
                simplex[worst] = expanded;
                values[worst] = f_e;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_r;
            }
            continue;
        }
        if f_r < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_r;
            continue;
        }
        let (contracted, f_c) = if f_r < values[worst] {
            let c = along(0.5);
            let fc = eval(&c)?;
            (c, fc)
        } else {
            let c = along(-0.5);
            let fc = eval(&c)?;
            (c, fc)
        };
        if f_c < values[worst].min(f_r) {
            simplex[worst] = contracted;
            values[worst] = f_c;
            continue;
        }
        // shrink towards the best vertex
        let anchor = simplex[best].clone();
        for &i in &order[1..] {
            let shrunk: Vec<f64> = simplex[i]
                .iter()
                .zip(&anchor)
                .map(|(x, b)| b + 0.5 * (x - b))
                .collect();
            values[i] = eval(&shrunk)?;
            simplex[i] = shrunk;
        }
    }

    let best = (0..=dim)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    Ok(SimplexResult {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
    })
}
