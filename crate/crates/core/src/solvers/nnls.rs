//! Lawson–Hanson active-set solver for `min ‖b − a y‖₂` subject to `y ≥ 0`.

use crate::error::{NmfError, Result};
use crate::linalg::{dot, least_squares, DenseMatrix};

/// Non-negative least squares.
///
/// The outer loop is capped at `10 · cols` iterations.
pub fn nnls_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(NmfError::Shape(format!(
            "right-hand side of length {} for {m} equations",
            b.len()
        )));
    }
    if !a.is_finite() || b.iter().any(|v| !v.is_finite()) {
        return Err(NmfError::InvalidParameter("nnls inputs must be finite".into()));
    }
    let columns: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let a_norm1 = columns
        .iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let tol = 10.0 * f64::EPSILON * a_norm1 * (m.max(n) as f64) * b.iter().map(|v| v.abs()).fold(1.0f64, f64::max);

    let mut x = vec![0.0; n];
    let mut passive = vec![false; n];
    let max_outer = 10 * n.max(1);

    let gradient = |x: &[f64]| -> Vec<f64> {
        let resid: Vec<f64> = (0..m)
            .map(|i| b[i] - dot(a.row(i), x))
            .collect();
        columns.iter().map(|c| dot(c, &resid)).collect()
    };

    let mut outer = 0;
    loop {
        let w = gradient(&x);
        let candidate = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| w[i].total_cmp(&w[j]).then(j.cmp(&i)));
        let Some(t) = candidate else { break };
        if w[t] <= tol {
            break;
        }
        outer += 1;
        if outer > max_outer {
            return Err(NmfError::ConvergenceFailure("nnls"));
        }
        passive[t] = true;
        let x_before = x.clone();

        loop {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub = a.select_columns(&idx);
            let z_sub = least_squares(&sub, b)?;
            let mut z = vec![0.0; n];
            for (&j, &v) in idx.iter().zip(&z_sub) {
                z[j] = v;
            }
            if idx.iter().all(|&j| z[j] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for &j in &idx {
                if z[j] <= 0.0 {
                    let denom = x[j] - z[j];
                    let step = if denom > 0.0 { x[j] / denom } else { 0.0 };
                    alpha = alpha.min(step);
                }
            }
            for j in 0..n {
                x[j] += alpha * (z[j] - x[j]);
            }
            for &j in &idx {
                if x[j] <= tol.max(0.0) && (z[j] <= 0.0 || x[j] <= 0.0) {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
        // The entering variable could not move off zero: the gradient signal
        // was numerical noise, so the current point is optimal.
        if !passive[t] && x == x_before {
            break;
        }
    }
    x.iter_mut().for_each(|v| *v = v.max(0.0));
    Ok(x)
}
