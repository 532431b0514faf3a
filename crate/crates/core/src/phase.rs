//! Phase unwrapping and finite-difference derivatives on uniform grids.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::transform::ComplexSpectrum;

const MIN_MAGNITUDE: f64 = 1e-300;

pub fn unwrap_phase(s: &ComplexSpectrum) -> Result<Vec<f64>> {
    unwrap_values(s.values())
}

/// Continuous phase of a sequence of complex samples; consecutive
/// differences lie in (−π, π].
pub fn unwrap_values(values: &[Complex64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(values.len());
    let mut offset = 0.0;
    let mut prev = 0.0;
    for (index, v) in values.iter().enumerate() {
        let magnitude = v.norm();
        if !(magnitude >= MIN_MAGNITUDE) {
            return Err(Error::SingularPhase { index, magnitude });
        }
        let raw = v.arg();
        if index > 0 {
            let mut step = raw + offset - prev;
            while step > PI {
                offset -= TAU;
                step -= TAU;
            }
            while step <= -PI {
                offset += TAU;
                step += TAU;
            }
        }
        prev = raw + offset;
        out.push(prev);
    }
    Ok(out)
}

/// Derivative of samples taken on `grid`: five-point central differences in
/// the interior, three-point formulas next to and at the edges.
pub fn numeric_derivative(f: &[f64], grid: &FrequencyGrid) -> Result<Vec<f64>> {
    if f.len() != grid.n_samples() {
        return Err(Error::GridMismatch(format!(
            "{} samples for a {}-point grid",
            f.len(),
            grid.n_samples()
        )));
    }
    Ok(uniform_derivative(f, grid.spacing()))
}

pub(crate) fn uniform_derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
            } else if i == 1 || i == n - 2 {
                (f[i + 1] - f[i - 1]) / (2.0 * h)
            } else {
                (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h)
            }
        })
        .collect()
}

/// Five-point central derivative of a scalar function at `x`.
pub fn five_point(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Derivative of `arg g` at `x`. Phases are taken relative to `g(x)`, which
/// keeps the stencil on one branch for any step small enough to resolve `g`.
pub fn phase_slope(g: impl Fn(f64) -> Complex64, x: f64, h: f64) -> f64 {
    let reference = g(x).conj();
    five_point(|y| (g(y) * reference).arg(), x, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_phase_unwraps_to_a_line() {
        let grid = FrequencyGrid::new(1024, 0.05, 0.0).unwrap();
        let tau = 3.7;
        let s = ComplexSpectrum::from_fn(grid, |d| Complex64::from_polar(1.0, d * tau));
        let phi = unwrap_phase(&s).unwrap();
        for w in phi.windows(2) {
            assert!(((w[1] - w[0]) - tau * 0.05).abs() < 1e-12);
        }
        let slope = numeric_derivative(&phi, &grid).unwrap();
        assert!(slope.iter().all(|v| (v - tau).abs() < 1e-9));
    }

    #[test]
    fn zero_sample_is_named() {
        let v = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        match unwrap_values(&v) {
            Err(Error::SingularPhase { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn edges_are_second_order() {
        let f: Vec<f64> = (0..8).map(|i| (i as f64 * 0.5).powi(2)).collect();
        let d = uniform_derivative(&f, 0.5);
        for (i, v) in d.iter().enumerate() {
            assert!((v - 2.0 * i as f64 * 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_slope_of_shift() {
        let g = |d: f64| Complex64::from_polar(2.0, 0.4 * d + 3.0);
        assert!((phase_slope(g, 100.0, 1e-3) - 0.4).abs() < 1e-9);
    }
}
