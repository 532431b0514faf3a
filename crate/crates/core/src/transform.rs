//! Sampled Fourier pair with kernel `e^{−iΔt}` and symmetric `1/√(2π)`
//! normalization:
//!
//! ```text
//! x(t_k) = (dΔ/√2π) Σ_j s(Δ_j) e^{−iΔ_j t_k}
//! s(Δ_j) = (dt/√2π) Σ_k x(t_k) e^{+iΔ_j t_k}
//! ```
//!
//! Both directions are exact inverses on conjugate grids and are evaluated
//! with one FFT each. The time grid is periodic with period 2π/dΔ, so a
//! causal signal wraps around into negative times once it outlives the span.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{FrequencyGrid, TimeGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrace {
    grid: TimeGrid,
    values: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_samples() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}-point frequency grid",
                values.len(),
                grid.n_samples()
            )));
        }
        Ok(ComplexSpectrum { grid, values })
    }

    pub fn from_fn(grid: FrequencyGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.n_samples()).map(|j| f(grid.point(j))).collect();
        ComplexSpectrum { grid, values }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Pointwise product with `f(Δ)`.
    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, &v)| f(self.grid.point(j), v))
            .collect();
        ComplexSpectrum {
            grid: self.grid,
            values,
        }
    }
}

impl TimeTrace {
    pub fn new(grid: TimeGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_samples() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}-point time grid",
                values.len(),
                grid.n_samples()
            )));
        }
        Ok(TimeTrace { grid, values })
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.n_samples()).map(|k| f(grid.point(k))).collect();
        TimeTrace { grid, values }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    let plan = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        }
    });
    plan.process(buf);
}

fn alternating(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Transform a spectrum onto the conjugate time grid centered at t = 0.
pub fn forward_transform(s: &ComplexSpectrum) -> TimeTrace {
    forward_transform_at(s, 0.0)
}

/// Transform a spectrum onto the conjugate time grid whose middle sample is
/// `origin`.
pub fn forward_transform_at(s: &ComplexSpectrum, origin: f64) -> TimeTrace {
    let fg = s.grid;
    let tg = fg.conjugate(origin);
    let n = fg.n_samples();
    let half = (n / 2) as f64;
    let mut buf: Vec<Complex64> = s
        .values
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let phase = -(j as f64 - half) * fg.spacing() * origin;
            v * Complex64::from_polar(alternating(j), phase)
        })
        .collect();
    fft_in_place(&mut buf, false);
    let norm = fg.spacing() / (2.0 * PI).sqrt();
    for (k, v) in buf.iter_mut().enumerate() {
        let phase = -fg.center() * tg.point(k);
        *v *= Complex64::from_polar(norm * alternating(k), phase);
    }
    TimeTrace {
        grid: tg,
        values: buf,
    }
}

/// Exact inverse of [`forward_transform_at`]; the frequency grid is centered
/// at `center`.
pub fn inverse_transform_at(x: &TimeTrace, center: f64) -> ComplexSpectrum {
    let tg = x.grid;
    let fg = tg.conjugate(center);
    let n = tg.n_samples();
    let half = (n / 2) as f64;
    let mut buf: Vec<Complex64> = x
        .values
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let phase = center * tg.point(k);
            v * Complex64::from_polar(alternating(k), phase)
        })
        .collect();
    fft_in_place(&mut buf, true);
    let norm = tg.spacing() / (2.0 * PI).sqrt();
    for (j, v) in buf.iter_mut().enumerate() {
        let phase = (j as f64 - half) * fg.spacing() * tg.origin();
        *v *= Complex64::from_polar(norm * alternating(j), phase);
    }
    ComplexSpectrum {
        grid: fg,
        values: buf,
    }
}

/// Inverse transform onto a frequency grid centered at zero.
pub fn inverse_transform(x: &TimeTrace) -> ComplexSpectrum {
    inverse_transform_at(x, 0.0)
}

/// Inverse transform onto a prescribed frequency grid, which must be
/// conjugate to the trace's time grid.
pub fn inverse_transform_onto(x: &TimeTrace, grid: &FrequencyGrid) -> Result<ComplexSpectrum> {
    let expected = x.grid.conjugate(grid.center());
    if expected.n_samples() != grid.n_samples()
        || (expected.spacing() - grid.spacing()).abs() > 1e-12 * grid.spacing()
    {
        return Err(Error::GridMismatch(
            "frequency grid is not conjugate to the time grid".into(),
        ));
    }
    Ok(inverse_transform_at(x, grid.center()))
}

/// Circular cross-correlation `c[m] = Σ_k a[k + m] · b[k]` of two real series.
pub fn circular_cross_correlation(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!(
            "cross-correlation of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    let mut fa: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut fb: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_in_place(&mut fa, false);
    fft_in_place(&mut fb, false);
    let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y.conj()).collect();
    fft_in_place(&mut prod, true);
    Ok(prod.into_iter().map(|v| v.re / n as f64).collect())
}
