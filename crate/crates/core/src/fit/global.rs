use serde::{Deserialize, Serialize};

use super::lm::{minimize, LmOptions};
use super::FitSettings;
use crate::cavity::CavityParams;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::synth::{intensity_matrix, Dataset};

const NAMES: [&str; 4] = ["kappa", "g2n", "delta_c", "L"];

/// Maps between the parameter vector seen by the optimizer and the full set.
struct Layout {
    base: GlobalParams,
    free_kappa: bool,
}

impl Layout {
    fn names(&self) -> &'static [&'static str] {
        if self.free_kappa {
            &NAMES
        } else {
            &NAMES[1..]
        }
    }

    fn pack(&self, p: &GlobalParams) -> Vec<f64> {
        let all = p.to_vec();
        if self.free_kappa {
            all.to_vec()
        } else {
            all[1..].to_vec()
        }
    }

    fn unpack(&self, x: &[f64]) -> GlobalParams {
        if self.free_kappa {
            GlobalParams::from_slice(x)
        } else {
            GlobalParams::from_slice(&[self.base.kappa, x[0], x[1], x[2]])
        }
    }
}

/// Parameters varied by the global fit. Splittings keep their defaults and
/// the in/out coupling is tied to κ/2; both only rescale the signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalParams {
    pub kappa: f64,
    pub g2n: f64,
    pub delta_c: f64,
    pub effective_thickness: f64,
}

impl Default for GlobalParams {
    fn default() -> Self {
        let c = CavityParams::default();
        GlobalParams {
            kappa: c.kappa,
            g2n: c.g2n,
            delta_c: c.delta_c,
            effective_thickness: crate::foil::REFERENCE_THICKNESS,
        }
    }
}

impl GlobalParams {
    pub fn cavity(&self) -> CavityParams {
        CavityParams {
            kappa: self.kappa,
            kappa_r: self.kappa / 2.0,
            delta_c: self.delta_c,
            g2n: self.g2n,
            ..CavityParams::default()
        }
    }

    fn to_vec(self) -> [f64; 4] {
        [self.kappa, self.g2n, self.delta_c, self.effective_thickness]
    }

    fn from_slice(x: &[f64]) -> Self {
        GlobalParams {
            kappa: x[0],
            g2n: x[1],
            delta_c: x[2],
            effective_thickness: x[3],
        }
    }

    fn admissible(&self) -> bool {
        self.kappa > 0.0 && self.g2n >= 0.0 && self.effective_thickness >= 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalFitResult {
    pub kappa: f64,
    pub g2n: f64,
    pub delta_c: f64,
    pub effective_thickness: f64,
    /// Counts per unit of model intensity.
    pub scale: f64,
    /// Weighted sum of squared residuals of the normalized fit.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl GlobalFitResult {
    pub fn params(&self) -> GlobalParams {
        GlobalParams {
            kappa: self.kappa,
            g2n: self.g2n,
            delta_c: self.delta_c,
            effective_thickness: self.effective_thickness,
        }
    }

    pub fn cavity(&self) -> CavityParams {
        self.params().cavity()
    }

    /// Global parameters known in advance, e.g. the truth of a synthetic set.
    pub fn fixed(params: GlobalParams, scale: f64) -> Self {
        GlobalFitResult {
            kappa: params.kappa,
            g2n: params.g2n,
            delta_c: params.delta_c,
            effective_thickness: params.effective_thickness,
            scale,
            residual: 0.0,
            iterations: 0,
            converged: true,
        }
    }
}

struct GatedData<'a> {
    data: &'a Dataset,
    rows: Vec<usize>,
    row_sums: Vec<f64>,
}

impl<'a> GatedData<'a> {
    fn new(data: &'a Dataset, settings: &FitSettings) -> Result<Self> {
        let rows: Vec<usize> = data
            .config
            .bin_centers()
            .iter()
            .enumerate()
            .filter(|(_, &t)| t >= settings.gate_start)
            .map(|(k, _)| k)
            .collect();
        if rows.is_empty() {
            return Err(Error::EmptyData("no time bins after the gate".into()));
        }
        let row_sums: Vec<f64> = rows.iter().map(|&k| data.values.row(k).sum()).collect();
        if row_sums.iter().all(|&s| s == 0.0) {
            return Err(Error::EmptyData("all gated rows are empty".into()));
        }
        Ok(GatedData { data, rows, row_sums })
    }

    fn residuals(&self, p: &GlobalParams, settings: &FitSettings, exec: Exec) -> Option<Vec<f64>> {
        if !p.admissible() {
            return None;
        }
        let model = intensity_matrix(
            &self.data.config,
            p.effective_thickness,
            &p.cavity(),
            settings.model,
            exec,
        )
        .ok()?;
        let n_cols = self.data.values.ncols();
        let mut out = Vec::with_capacity(self.rows.len() * n_cols);
        for (&k, &s) in self.rows.iter().zip(&self.row_sums) {
            let m_sum = model.row(k).sum();
            for j in 0..n_cols {
                let c = self.data.values[[k, j]];
                if s == 0.0 {
                    out.push(0.0);
                    continue;
                }
                let m = if m_sum > 0.0 { model[[k, j]] / m_sum } else { 0.0 };
                out.push((c / s - m) * s / c.max(1.0).sqrt());
            }
        }
        out.iter().all(|v| v.is_finite()).then_some(out)
    }

    /// Amplitude of the unnormalized model: the Poisson maximum-likelihood
    /// ratio of gated counts to gated model intensity.
    fn scale(&self, p: &GlobalParams, settings: &FitSettings, exec: Exec) -> Result<f64> {
        let model = intensity_matrix(
            &self.data.config,
            p.effective_thickness,
            &p.cavity(),
            settings.model,
            exec,
        )?;
        let counts: f64 = self.row_sums.iter().sum();
        let expected: f64 = self.rows.iter().map(|&k| model.row(k).sum()).sum();
        Ok(if expected > 0.0 { counts / expected } else { 0.0 })
    }
}

/// Weighted residual of the normalized model at `params`, without fitting.
pub fn global_residual(
    data: &Dataset,
    params: &GlobalParams,
    settings: &FitSettings,
    exec: Exec,
) -> Result<f64> {
    let gated = GatedData::new(data, settings)?;
    let r = gated
        .residuals(params, settings, exec)
        .ok_or_else(|| Error::invalid("params", "outside the model domain"))?;
    Ok(r.iter().map(|v| v * v).sum())
}

/// Fit |g|²N, Δ_C and L (and κ if [`FitSettings::free_kappa`]) to the
/// per-time-step normalized, gated data.
///
/// Normalizing each time row removes the overall amplitude, so the scale is
/// not part of the iteration; it is fitted afterwards in closed form against
/// the unnormalized data.
pub fn fit_global(
    data: &Dataset,
    init: &GlobalParams,
    settings: &FitSettings,
    exec: Exec,
) -> Result<GlobalFitResult> {
    settings.validate()?;
    if !init.admissible() {
        return Err(Error::invalid("init", "κ must be positive, g2N and L non-negative"));
    }
    let gated = GatedData::new(data, settings)?;
    let opts = LmOptions {
        max_iterations: settings.max_iterations,
        step_tolerance: settings.step_tolerance,
    };
    let layout = Layout {
        base: *init,
        free_kappa: settings.free_kappa,
    };
    let out = minimize(
        |x| gated.residuals(&layout.unpack(x), settings, exec),
        &layout.pack(init),
        layout.names(),
        opts,
    )?;
    let params = layout.unpack(&out.x);
    let scale = gated.scale(&params, settings, exec)?;
    Ok(GlobalFitResult {
        kappa: params.kappa,
        g2n: params.g2n,
        delta_c: params.delta_c,
        effective_thickness: params.effective_thickness,
        scale,
        residual: out.chi2,
        iterations: out.iterations,
        converged: out.converged,
    })
}
