use serde::{Deserialize, Serialize};

use super::global::GlobalFitResult;
use super::lm::{minimize, LmOptions};
use super::{linspace, DelayObjective, FitSettings};
use crate::cavity::{group_delay_with, peak_reflection, DEFAULT_PHASE_STEP};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::response::snxp_intensity;
use crate::synth::Dataset;

/// Columns with |R(Δ_D)| below this fraction of max |R| are flagged.
const LOW_AMPLITUDE: f64 = 0.1;
const MIN_BINS: usize = 10;
/// Lower bound on a single fit's variance, so an exact fit cannot take an
/// infinite weight.
const MIN_VARIANCE: f64 = 1e-150;
/// Floor on the model mean inside the Poisson deviance.
const MIN_MEAN: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayFlag {
    /// |R(Δ_D)| is small: the column carries little delayed signal.
    LowAmplitude,
    /// The group delay of the global model is unreliable here.
    UnreliablePhase,
    /// Fewer than ten bins remain after the gate.
    TooFewBins,
    /// No stage-two fit ended inside the delay window.
    Invalid,
}

impl DelayFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            DelayFlag::LowAmplitude => "low_amplitude",
            DelayFlag::UnreliablePhase => "unreliable_phase",
            DelayFlag::TooFewBins => "too_few_bins",
            DelayFlag::Invalid => "invalid",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayEstimate {
    pub detuning: f64,
    /// Inverse-variance weighted mean of the kept fits; NaN when invalid.
    pub tau_mean: f64,
    /// Infinite when invalid.
    pub tau_stderr: f64,
    pub n_kept_starts: usize,
    /// Best stage-one delay, the center of the stage-two starts.
    pub stage1_tau: f64,
    pub flags: Vec<DelayFlag>,
}

impl DelayEstimate {
    pub fn is_valid(&self) -> bool {
        !self.flags.contains(&DelayFlag::Invalid)
    }

    fn invalid(detuning: f64, stage1_tau: f64, mut flags: Vec<DelayFlag>) -> Self {
        flags.push(DelayFlag::Invalid);
        DelayEstimate {
            detuning,
            tau_mean: f64::NAN,
            tau_stderr: f64::INFINITY,
            n_kept_starts: 0,
            stage1_tau,
            flags,
        }
    }
}

/// One detuning column: bin centers, counts and the common bin width.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnData {
    pub times: Vec<f64>,
    pub counts: Vec<f64>,
    pub bin_width: f64,
}

impl ColumnData {
    pub fn from_dataset(data: &Dataset, column: usize) -> Self {
        ColumnData {
            times: data.config.bin_centers(),
            counts: data.values.column(column).to_vec(),
            bin_width: data.config.bin_width(),
        }
    }
}

struct SingleFit {
    tau: f64,
    chi2: f64,
    dispersion: f64,
    variance: f64,
}

struct ColumnProblem<'a> {
    times: Vec<f64>,
    counts: Vec<f64>,
    /// scale · w · |R(Δ_D)|²
    amplitude: f64,
    thickness: f64,
    settings: &'a FitSettings,
}

impl ColumnProblem<'_> {
    fn residuals(&self, tau: f64) -> Vec<f64> {
        let objective = self.settings.delay_objective;
        self.times
            .iter()
            .zip(&self.counts)
            .map(|(&t, &c)| {
                let m = self.amplitude * snxp_intensity(t, tau, 1.0, self.thickness);
                match objective {
                    DelayObjective::PoissonDeviance => deviance_residual(c, m),
                    DelayObjective::Neyman => (c - m) / c.max(1.0).sqrt(),
                }
            })
            .collect()
    }

    fn fit_from(&self, start: f64) -> Option<SingleFit> {
        let opts = LmOptions {
            max_iterations: self.settings.max_iterations,
            step_tolerance: self.settings.step_tolerance,
        };
        let out = minimize(|x| Some(self.residuals(x[0])), &[start], &["tau"], opts).ok()?;
        let n = self.times.len();
        let jtj: f64 = out.jacobian.iter().map(|v| v * v).sum();
        let dispersion = match self.settings.delay_objective {
            DelayObjective::PoissonDeviance => 1.0,
            DelayObjective::Neyman => out.chi2 / (n as f64 - 1.0),
        };
        let variance = (dispersion / jtj).max(MIN_VARIANCE);
        (out.x[0].is_finite() && variance.is_finite()).then_some(SingleFit {
            tau: out.x[0],
            chi2: out.chi2,
            dispersion,
            variance,
        })
    }
}

/// Signed square root of the Poisson deviance of count `c` under mean `m`.
fn deviance_residual(c: f64, m: f64) -> f64 {
    let m = m.max(MIN_MEAN);
    let log_term = if c > 0.0 { c * (c / m).ln() } else { 0.0 };
    let d = 2.0 * (m - c + log_term);
    (c - m).signum() * d.max(0.0).sqrt()
}

struct Context {
    peak: f64,
}

fn fit_column(
    column: &ColumnData,
    delta_d: f64,
    global: &GlobalFitResult,
    settings: &FitSettings,
    ctx: &Context,
) -> DelayEstimate {
    let cavity = global.cavity();
    let gd = group_delay_with(delta_d, &cavity, DEFAULT_PHASE_STEP, ctx.peak);
    let mut flags = Vec::new();
    if gd.reflection.norm() < LOW_AMPLITUDE * ctx.peak {
        flags.push(DelayFlag::LowAmplitude);
    }
    if !gd.reliable {
        flags.push(DelayFlag::UnreliablePhase);
    }
    let (times, counts): (Vec<f64>, Vec<f64>) = column
        .times
        .iter()
        .zip(&column.counts)
        .filter(|(&t, _)| t >= settings.gate_start)
        .map(|(&t, &c)| (t, c))
        .unzip();
    if times.len() < MIN_BINS {
        flags.push(DelayFlag::TooFewBins);
        return DelayEstimate::invalid(delta_d, f64::NAN, flags);
    }
    let problem = ColumnProblem {
        times,
        counts,
        amplitude: global.scale * column.bin_width * gd.reflection.norm_sqr(),
        thickness: global.effective_thickness,
        settings,
    };

    let (lo, hi) = settings.delay_window;
    let stage1 = linspace(lo, hi, settings.n_starts_stage1)
        .into_iter()
        .filter_map(|s| problem.fit_from(s))
        .min_by(|a, b| a.chi2.total_cmp(&b.chi2));
    let Some(best) = stage1 else {
        return DelayEstimate::invalid(delta_d, f64::NAN, flags);
    };
    let tau0 = best.tau;
    let h = settings.refine_halfwidth;
    let stage2: Vec<SingleFit> = linspace(tau0 - h, tau0 + h, settings.n_starts_stage2)
        .into_iter()
        .filter_map(|s| problem.fit_from(s))
        .collect();
    // Starts that settle in a side minimum, one beat period away, would drag
    // the mean; only fits about as good as the best one are combined. The
    // best may lie outside the window, in which case nothing is kept.
    let floor = stage2.iter().map(|f| f.chi2).fold(best.chi2, f64::min);
    let kept: Vec<SingleFit> = stage2
        .into_iter()
        .filter(|f| f.tau >= lo && f.tau <= hi)
        .filter(|f| match settings.keep_margin {
            Some(margin) => f.chi2 <= floor + margin * f.dispersion,
            None => true,
        })
        .collect();
    if kept.is_empty() {
        return DelayEstimate::invalid(delta_d, tau0, flags);
    }
    let taus: Vec<f64> = kept.iter().map(|f| f.tau).collect();
    let variances: Vec<f64> = kept.iter().map(|f| f.variance).collect();
    let (mean, stderr) = weighted_delay(&taus, &variances);
    DelayEstimate {
        detuning: delta_d,
        tau_mean: mean,
        tau_stderr: stderr,
        n_kept_starts: kept.len(),
        stage1_tau: tau0,
        flags,
    }
}

/// Inverse-variance weighted mean of several fits of the same data and its
/// standard error.
///
/// The fits share one data set, so their variances are not averaged down:
/// the error is the harmonic mean of the variances plus the weighted scatter
/// of the delays about the mean. Empty input gives `(NaN, ∞)`.
pub fn weighted_delay(taus: &[f64], variances: &[f64]) -> (f64, f64) {
    let n = taus.len().min(variances.len());
    if n == 0 {
        return (f64::NAN, f64::INFINITY);
    }
    let weights: Vec<f64> = variances[..n].iter().map(|v| 1.0 / v).collect();
    let wsum: f64 = weights.iter().sum();
    let mean = taus.iter().zip(&weights).map(|(t, w)| w * t).sum::<f64>() / wsum;
    let spread = taus
        .iter()
        .zip(&weights)
        .map(|(t, w)| w * (t - mean).powi(2))
        .sum::<f64>()
        / wsum
        / (n as f64 - 1.0).max(1.0);
    (mean, (n as f64 / wsum + spread).sqrt())
}

/// Delay of one column with the global parameters held fixed.
///
/// Stage one fits from equidistant starts across the delay window and keeps
/// the best; stage two refits from starts around it, keeps the fits that end
/// inside the window and are within [`FitSettings::keep_margin`] of the best,
/// and combines them with [`weighted_delay`]. The variance of a single fit
/// comes from the curvature of the objective at its minimum; see
/// [`DelayObjective`](super::DelayObjective) for the scaling.
pub fn fit_delay_column(
    column: &ColumnData,
    delta_d: f64,
    global: &GlobalFitResult,
    settings: &FitSettings,
) -> Result<DelayEstimate> {
    settings.validate()?;
    if column.times.len() != column.counts.len() {
        return Err(Error::GridMismatch("times and counts differ in length".into()));
    }
    let ctx = Context {
        peak: peak_reflection(&global.cavity()),
    };
    Ok(fit_column(column, delta_d, global, settings, &ctx))
}

/// [`fit_delay_column`] over every detuning of the dataset.
pub fn delay_curve(
    data: &Dataset,
    global: &GlobalFitResult,
    settings: &FitSettings,
    exec: Exec,
) -> Result<Vec<DelayEstimate>> {
    let all: Vec<usize> = (0..data.config.n_detunings).collect();
    delay_curve_columns(data, global, settings, &all, exec)
}

/// [`fit_delay_column`] over the selected column indices.
pub fn delay_curve_columns(
    data: &Dataset,
    global: &GlobalFitResult,
    settings: &FitSettings,
    columns: &[usize],
    exec: Exec,
) -> Result<Vec<DelayEstimate>> {
    settings.validate()?;
    if let Some(&bad) = columns.iter().find(|&&j| j >= data.config.n_detunings) {
        return Err(Error::invalid("columns", format!("index {bad} out of range")));
    }
    let detunings = data.config.detunings();
    let ctx = Context {
        peak: peak_reflection(&global.cavity()),
    };
    Ok(exec.map(columns.len(), |i| {
        let j = columns[i];
        fit_column(
            &ColumnData::from_dataset(data, j),
            detunings[j],
            global,
            settings,
            &ctx,
        )
    }))
}
