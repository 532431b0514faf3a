//! Uniform frequency and time axes linked by `dt · dΔ · n = 2π`.
//!
//! Sample `j` of a grid with `n` points sits at `center + (j − n/2)·spacing`,
//! so index `n/2` is the center (or origin) itself.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SAMPLES: usize = 1 << 16;
pub const DEFAULT_HALF_SPAN: f64 = 512.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    n_samples: usize,
    spacing: f64,
    center: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    n_samples: usize,
    spacing: f64,
    origin: f64,
}

fn check_layout(n: usize, spacing: f64, anchor: f64) -> Result<()> {
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::invalid(
            "n_samples",
            format!("must be a power of two ≥ 4, got {n}"),
        ));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::invalid(
            "spacing",
            format!("must be positive, got {spacing}"),
        ));
    }
    crate::error::ensure_finite("center", anchor)
}

impl FrequencyGrid {
    pub fn new(n_samples: usize, spacing: f64, center: f64) -> Result<Self> {
        check_layout(n_samples, spacing, center)?;
        Ok(FrequencyGrid {
            n_samples,
            spacing,
            center,
        })
    }

    /// Like [`FrequencyGrid::new`] but also requires the implied time span to
    /// cover `window`.
    pub fn with_window(n_samples: usize, spacing: f64, center: f64, window: f64) -> Result<Self> {
        let g = Self::new(n_samples, spacing, center)?;
        if g.time_span() <= window {
            return Err(Error::invalid(
                "spacing",
                format!(
                    "time span {:.4} does not exceed the analysis window {window}",
                    g.time_span()
                ),
            ));
        }
        Ok(g)
    }

    /// ±512γ with 2¹⁶ samples (spacing γ/64, time span ≈ 402/γ).
    pub fn default_grid() -> Self {
        FrequencyGrid {
            n_samples: DEFAULT_SAMPLES,
            spacing: 2.0 * DEFAULT_HALF_SPAN / DEFAULT_SAMPLES as f64,
            center: 0.0,
        }
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn point(&self, j: usize) -> f64 {
        self.center + (j as f64 - (self.n_samples / 2) as f64) * self.spacing
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_samples).map(|j| self.point(j)).collect()
    }

    /// Period of the conjugate time axis, 2π/spacing.
    pub fn time_span(&self) -> f64 {
        TAU / self.spacing
    }

    /// The time grid paired with this grid whose middle sample is at `origin`.
    pub fn conjugate(&self, origin: f64) -> TimeGrid {
        TimeGrid {
            n_samples: self.n_samples,
            spacing: TAU / (self.spacing * self.n_samples as f64),
            origin,
        }
    }
}

impl TimeGrid {
    pub fn new(n_samples: usize, spacing: f64, origin: f64) -> Result<Self> {
        check_layout(n_samples, spacing, origin)?;
        Ok(TimeGrid {
            n_samples,
            spacing,
            origin,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn point(&self, k: usize) -> f64 {
        self.origin + (k as f64 - (self.n_samples / 2) as f64) * self.spacing
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_samples).map(|k| self.point(k)).collect()
    }

    /// Frequency grid paired with this one, centered at `center`.
    pub fn conjugate(&self, center: f64) -> FrequencyGrid {
        FrequencyGrid {
            n_samples: self.n_samples,
            spacing: TAU / (self.spacing * self.n_samples as f64),
            center,
        }
    }

    /// Index of the sample nearest to `t`, if it lies on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let k = ((t - self.origin) / self.spacing).round() + (self.n_samples / 2) as f64;
        (k >= 0.0 && k < self.n_samples as f64).then_some(k as usize)
    }
}
