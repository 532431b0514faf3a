//! Levenberg–Marquardt on a residual vector with a central-difference
//! Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LmOptions {
    pub max_iterations: usize,
    pub step_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LmOutcome {
    pub x: Vec<f64>,
    pub chi2: f64,
    pub residuals: Vec<f64>,
    pub jacobian: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
}

const RELATIVE_STEP: f64 = 1e-6;
const MAX_DAMPING: f64 = 1e16;

fn chi2(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// Residuals return `None` where the parameters are outside the model's
/// domain; such trial points are rejected like an uphill step.
pub(crate) fn jacobian<F>(f: &F, x: &[f64], m: usize) -> Option<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let mut jac = DMatrix::zeros(m, x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let h = RELATIVE_STEP * x[i].abs().max(1.0);
        probe[i] = x[i] + h;
        let up = f(&probe)?;
        probe[i] = x[i] - h;
        let down = f(&probe)?;
        probe[i] = x[i];
        for k in 0..m {
            jac[(k, i)] = (up[k] - down[k]) / (2.0 * h);
        }
    }
    Some(jac)
}

/// Correlation matrix of the normal equations, rendered for error reports.
pub(crate) fn correlation_report(jtj: &DMatrix<f64>, names: &[&str]) -> String {
    let n = jtj.nrows();
    let mut out = String::from("parameter correlations:");
    for i in 0..n {
        out.push_str(&format!("\n  {:>8}", names.get(i).copied().unwrap_or("?")));
        for j in 0..n {
            let d = (jtj[(i, i)] * jtj[(j, j)]).sqrt();
            let c = if d > 0.0 { jtj[(i, j)] / d } else { f64::NAN };
            out.push_str(&format!(" {c:>7.4}"));
        }
    }
    out
}

fn singular(jtj: &DMatrix<f64>) -> bool {
    let diag_ok = (0..jtj.nrows()).all(|i| jtj[(i, i)] > 0.0 && jtj[(i, i)].is_finite());
    if !diag_ok {
        return true;
    }
    // Condition of the diagonally scaled normal matrix.
    let d = DVector::from_fn(jtj.nrows(), |i, _| 1.0 / jtj[(i, i)].sqrt());
    let scaled = DMatrix::from_fn(jtj.nrows(), jtj.ncols(), |i, j| jtj[(i, j)] * d[i] * d[j]);
    let sv = scaled.singular_values();
    let max = sv.max();
    let min = sv.min();
    !(min > 1e-14 * max)
}

pub(crate) fn minimize<F>(f: F, x0: &[f64], names: &[&str], opts: LmOptions) -> Result<LmOutcome>
where
    F: Fn(&[f64]) -> Option<Vec<f64>>,
{
    let mut x = x0.to_vec();
    let mut r = f(&x).ok_or_else(|| Error::invalid("initial", "parameters outside the model domain"))?;
    let m = r.len();
    if m < x.len() {
        return Err(Error::EmptyData(format!(
            "{m} residuals for {} parameters",
            x.len()
        )));
    }
    let mut cost = chi2(&r);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    let mut jac = jacobian(&f, &x, m)
        .ok_or_else(|| Error::DegenerateFit("Jacobian probe left the model domain".into()))?;

    while iterations < opts.max_iterations {
        let jtj = jac.transpose() * &jac;
        if singular(&jtj) {
            return Err(Error::DegenerateFit(correlation_report(&jtj, names)));
        }
        let rv = DVector::from_column_slice(&r);
        let g = jac.transpose() * rv;
        iterations += 1;
        let mut improved = false;
        while lambda <= MAX_DAMPING {
            let mut a = jtj.clone();
            for i in 0..a.nrows() {
                a[(i, i)] *= 1.0 + lambda;
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            match f(&trial) {
                Some(tr) if chi2(&tr) <= cost => {
                    let rel = step
                        .iter()
                        .zip(&x)
                        .map(|(s, v)| (s / v.abs().max(1e-12)).abs())
                        .fold(0.0, f64::max);
                    x = trial;
                    cost = chi2(&tr);
                    r = tr;
                    lambda = (lambda / 10.0).max(1e-12);
                    improved = true;
                    if rel < opts.step_tolerance {
                        converged = true;
                    }
                    break;
                }
                _ => lambda *= 10.0,
            }
        }
        if !improved {
            // No downhill step at any damping: a local minimum to working precision.
            converged = true;
        }
        if converged {
            break;
        }
        jac = jacobian(&f, &x, m)
            .ok_or_else(|| Error::DegenerateFit("Jacobian probe left the model domain".into()))?;
    }
    let jacobian = jacobian(&f, &x, m).unwrap_or(jac);
    Ok(LmOutcome {
        x,
        chi2: cost,
        residuals: r,
        jacobian,
        iterations,
        converged,
    })
}
