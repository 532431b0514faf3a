//! Synthetic photon counts over (time bin × Doppler detuning).

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::cavity::{group_delay_curve, CavityParams};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::foil::FoilParams;
use crate::grid::FrequencyGrid;
use crate::response::{snxp_intensity, DetectorModel};
use crate::units::Units;

/// Number of FFT samples used when evaluating the full model on the bin grid.
const MODEL_SAMPLES: usize = 1 << 13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub detuning_min: f64,
    pub detuning_max: f64,
    pub n_detunings: usize,
    pub time_min: f64,
    pub time_max: f64,
    pub n_time_bins: usize,
    pub total_expected_counts: f64,
    pub rng_seed: u64,
}

impl Default for SweepConfig {
    /// ±60γ in 121 steps, 0–200 ns in 200 bins, 10⁶ counts.
    fn default() -> Self {
        SweepConfig {
            detuning_min: -60.0,
            detuning_max: 60.0,
            n_detunings: 121,
            time_min: 0.0,
            time_max: Units::default().time_from_ns(200.0),
            n_time_bins: 200,
            total_expected_counts: 1e6,
            rng_seed: 0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.detuning_min,
            self.detuning_max,
            self.time_min,
            self.time_max,
            self.total_expected_counts,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("sweep", "all bounds must be finite"));
        }
        if self.n_detunings == 0 {
            return Err(Error::invalid("n_detunings", "must be positive"));
        }
        if self.n_detunings > 1 && self.detuning_max <= self.detuning_min {
            return Err(Error::invalid("detuning_max", "must exceed detuning_min"));
        }
        if self.n_time_bins == 0 {
            return Err(Error::invalid("n_time_bins", "must be positive"));
        }
        if self.time_max <= self.time_min {
            return Err(Error::invalid("time_max", "must exceed time_min"));
        }
        if self.total_expected_counts <= 0.0 {
            return Err(Error::invalid("total_expected_counts", "must be positive"));
        }
        Ok(())
    }

    pub fn detunings(&self) -> Vec<f64> {
        if self.n_detunings == 1 {
            return vec![self.detuning_min];
        }
        let step = (self.detuning_max - self.detuning_min) / (self.n_detunings - 1) as f64;
        (0..self.n_detunings)
            .map(|j| self.detuning_min + j as f64 * step)
            .collect()
    }

    pub fn bin_width(&self) -> f64 {
        (self.time_max - self.time_min) / self.n_time_bins as f64
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        let w = self.bin_width();
        (0..self.n_time_bins)
            .map(|k| self.time_min + (k as f64 + 0.5) * w)
            .collect()
    }
}

/// Which signal the counts are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalModel {
    /// Exact prompt plus delayed response, with their interference.
    #[default]
    Full,
    /// Linear-phase delayed response only, shifted by the group delay.
    Snxp,
}

/// Bin-integrated intensity (midpoint rule) before normalization to counts.
///
/// Entry `[k, j]` is `w·I(t_k, Δ_j)` with `w` the bin width and `t_k` the bin
/// center. Columns follow [`SweepConfig::detunings`].
pub fn intensity_matrix(
    cfg: &SweepConfig,
    effective_thickness: f64,
    cavity: &CavityParams,
    model: SignalModel,
    exec: Exec,
) -> Result<Array2<f64>> {
    cfg.validate()?;
    cavity.validate()?;
    FoilParams::new(effective_thickness, 0.0)?;
    let detunings = cfg.detunings();
    let times = cfg.bin_centers();
    let w = cfg.bin_width();
    let columns: Vec<Vec<f64>> = match model {
        SignalModel::Full => {
            // Samples fall on bin centers: dt = w, middle sample at the first bin.
            let grid = FrequencyGrid::new(MODEL_SAMPLES, 2.0 * std::f64::consts::PI / (MODEL_SAMPLES as f64 * w), 0.0)?;
            let model = DetectorModel::new(cavity, grid, times[0])?;
            let offset = MODEL_SAMPLES / 2;
            exec.map(detunings.len(), |j| {
                let foil = FoilParams {
                    effective_thickness,
                    doppler_detuning: detunings[j],
                    linewidth: 1.0,
                };
                let delayed = model.delayed(&foil);
                (0..times.len())
                    .map(|k| {
                        let idx = (offset + k) % MODEL_SAMPLES;
                        w * (model.prompt().values()[idx] + delayed.values()[idx]).norm_sqr()
                    })
                    .collect()
            })
        }
        SignalModel::Snxp => {
            let delays = group_delay_curve(&detunings, cavity, exec);
            exec.map(detunings.len(), |j| {
                let gd = &delays[j];
                let a2 = gd.reflection.norm_sqr();
                times
                    .iter()
                    .map(|&t| w * snxp_intensity(t, gd.tau, a2, effective_thickness))
                    .collect()
            })
        }
    };
    Ok(Array2::from_shape_fn((times.len(), detunings.len()), |(k, j)| {
        columns[j][k]
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedIntensity {
    /// Expected counts per bin; sums to `total_expected_counts` unless empty.
    pub matrix: Array2<f64>,
    /// Counts per unit of [`intensity_matrix`] entry.
    pub scale: f64,
    /// True when the model carries no signal at all (all zeros).
    pub empty: bool,
}

pub fn expected_intensity_matrix(
    cfg: &SweepConfig,
    effective_thickness: f64,
    cavity: &CavityParams,
    model: SignalModel,
    exec: Exec,
) -> Result<ExpectedIntensity> {
    let raw = intensity_matrix(cfg, effective_thickness, cavity, model, exec)?;
    let total = raw.sum();
    if !total.is_finite() {
        return Err(Error::Domain("model intensity is not finite".into()));
    }
    if total == 0.0 {
        return Ok(ExpectedIntensity {
            matrix: raw,
            scale: 0.0,
            empty: true,
        });
    }
    let scale = cfg.total_expected_counts / total;
    Ok(ExpectedIntensity {
        matrix: raw * scale,
        scale,
        empty: false,
    })
}

/// Poisson draw per bin. Column `j` uses stream `j` of a ChaCha8 generator
/// seeded with `seed`, so the result does not depend on scheduling.
pub fn sample_counts(expected: &Array2<f64>, seed: u64, exec: Exec) -> Result<Array2<u64>> {
    if let Some(bad) = expected.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!(
            "expected count must be finite and ≥ 0, got {bad}"
        )));
    }
    let (rows, cols) = expected.dim();
    let columns: Vec<Vec<u64>> = exec.map(cols, |j| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(j as u64);
        (0..rows)
            .map(|k| {
                let lambda = expected[[k, j]];
                if lambda == 0.0 {
                    0
                } else {
                    Poisson::new(lambda)
                        .expect("positive finite rate")
                        .sample(&mut rng) as u64
                }
            })
            .collect()
    });
    Ok(Array2::from_shape_fn((rows, cols), |(k, j)| columns[j][k]))
}

/// Parameters a synthetic dataset was generated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub cavity: CavityParams,
    pub effective_thickness: f64,
    pub scale: f64,
    pub model: SignalModel,
    /// Group delay at each detuning of the sweep.
    pub delays: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountMatrix {
    pub counts: Array2<u64>,
    pub config: SweepConfig,
    pub truth: Option<Truth>,
}

impl CountMatrix {
    pub fn new(counts: Array2<u64>, config: SweepConfig, truth: Option<Truth>) -> Result<Self> {
        config.validate()?;
        if counts.dim() != (config.n_time_bins, config.n_detunings) {
            return Err(Error::GridMismatch(format!(
                "count matrix is {:?}, sweep expects {} × {}",
                counts.dim(),
                config.n_time_bins,
                config.n_detunings
            )));
        }
        Ok(CountMatrix {
            counts,
            config,
            truth,
        })
    }

    pub fn total(&self) -> u64 {
        self.counts.sum()
    }

    pub fn to_dataset(&self) -> Dataset {
        Dataset {
            values: self.counts.mapv(|c| c as f64),
            config: self.config,
        }
    }
}

/// Real-valued counts (measured or expected) on a sweep layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub values: Array2<f64>,
    pub config: SweepConfig,
}

impl Dataset {
    pub fn new(values: Array2<f64>, config: SweepConfig) -> Result<Self> {
        config.validate()?;
        if values.dim() != (config.n_time_bins, config.n_detunings) {
            return Err(Error::GridMismatch(format!(
                "data matrix is {:?}, sweep expects {} × {}",
                values.dim(),
                config.n_time_bins,
                config.n_detunings
            )));
        }
        Ok(Dataset { values, config })
    }
}

/// Expected intensities and one Poisson draw, with the truth block attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesis {
    pub expected: ExpectedIntensity,
    pub data: CountMatrix,
}

pub fn synthesize(
    cfg: &SweepConfig,
    effective_thickness: f64,
    cavity: &CavityParams,
    model: SignalModel,
    exec: Exec,
) -> Result<Synthesis> {
    let expected = expected_intensity_matrix(cfg, effective_thickness, cavity, model, exec)?;
    let counts = sample_counts(&expected.matrix, cfg.rng_seed, exec)?;
    let delays = group_delay_curve(&cfg.detunings(), cavity, exec)
        .into_iter()
        .map(|g| g.tau)
        .collect();
    let truth = Truth {
        cavity: *cavity,
        effective_thickness,
        scale: expected.scale,
        model,
        delays,
    };
    let data = CountMatrix::new(counts, *cfg, Some(truth))?;
    Ok(Synthesis { expected, data })
}
