//! Two-stage analysis of a count matrix: a global fit of the cavity and foil
//! parameters on per-time-step normalized data, then a multi-start fit of the
//! delay in every detuning column.

mod delay;
mod global;
mod lm;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::synth::SignalModel;
use crate::units::gate_start;

pub use delay::{weighted_delay, delay_curve, delay_curve_columns, fit_delay_column, ColumnData, DelayEstimate, DelayFlag};
pub use global::{fit_global, global_residual, GlobalFitResult, GlobalParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSettings {
    /// Bins whose center lies before this time are ignored.
    pub gate_start: f64,
    pub n_starts_stage1: usize,
    pub n_starts_stage2: usize,
    /// Accepted delay range; also the span of the stage-one starts.
    pub delay_window: (f64, f64),
    pub refine_halfwidth: f64,
    pub max_iterations: usize,
    pub step_tolerance: f64,
    /// Signal model used by the global fit.
    pub model: SignalModel,
    /// Let the global fit vary κ as well. The normalized data depend on the
    /// cavity only through |g|²N/(κ + iΔ_C), so scaling κ, Δ_C and |g|²N
    /// together changes nothing and a fit with κ free is singular. By default
    /// κ stays at its initial value.
    pub free_kappa: bool,
    pub delay_objective: DelayObjective,
    /// Stage-two fits whose objective exceeds the best by more than this many
    /// units of the fit dispersion are dropped before averaging. `None` keeps
    /// every fit that ends inside the delay window.
    pub keep_margin: Option<f64>,
}

/// Per-bin objective of the delay fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayObjective {
    /// Poisson deviance. A fit's variance is the inverse Fisher information,
    /// so error bars are absolute and shrink with the count level.
    #[default]
    PoissonDeviance,
    /// χ² with weights 1/max(count, 1). A fit's variance is scaled by
    /// χ²/(n − 1), so estimate and error are unchanged when counts and the
    /// global scale are multiplied by a common factor.
    Neyman,
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            gate_start: gate_start(),
            n_starts_stage1: 50,
            n_starts_stage2: 50,
            delay_window: (-0.1, 0.4),
            refine_halfwidth: 0.25,
            max_iterations: 200,
            step_tolerance: 1e-8,
            model: SignalModel::Full,
            free_kappa: false,
            delay_objective: DelayObjective::PoissonDeviance,
            keep_margin: Some(0.1),
        }
    }
}

impl FitSettings {
    pub fn validate(&self) -> Result<()> {
        if !self.gate_start.is_finite() {
            return Err(Error::invalid("gate_start", "must be finite"));
        }
        if self.n_starts_stage1 == 0 || self.n_starts_stage2 == 0 {
            return Err(Error::invalid("n_starts", "must be positive"));
        }
        let (lo, hi) = self.delay_window;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::invalid("delay_window", "bounds must be finite and ordered"));
        }
        if !(self.refine_halfwidth > 0.0) {
            return Err(Error::invalid("refine_halfwidth", "must be positive"));
        }
        if let Some(m) = self.keep_margin {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(Error::invalid("keep_margin", "must be finite and ≥ 0"));
            }
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations", "must be positive"));
        }
        if !(self.step_tolerance > 0.0) {
            return Err(Error::invalid("step_tolerance", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub values: Array2<f64>,
    /// Rows that were all zero and are left at zero.
    pub zero_rows: Vec<usize>,
}

/// Scale each time row (across detunings) to unit sum.
pub fn normalize_per_timestep(m: &Array2<f64>) -> Normalized {
    let mut values = m.clone();
    let mut zero_rows = Vec::new();
    for (k, mut row) in values.rows_mut().into_iter().enumerate() {
        let s = row.sum();
        if s == 0.0 {
            zero_rows.push(k);
        } else {
            row /= s;
        }
    }
    Normalized { values, zero_rows }
}

/// `n` equidistant points covering `[lo, hi]`, both ends included.
pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}
