//! Time-resolved signal behind the crossed polarizers.
//!
//! The detected field is the transform of `R_Cavity(Δ)·T_foil(Δ)`. Splitting
//! `T_foil = 1 + (T_foil − 1)` gives a prompt part, the cavity's own response
//! to the broadband flash, and a delayed part carrying the narrow pulse.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::cavity::{cavity_reflection, group_delay, to_two_pole, Branch, CavityParams, TwoPoleForm};
use crate::error::{Error, Result};
use crate::foil::{bessel_kernel, foil_response_freq, FoilParams};
use crate::grid::FrequencyGrid;
use crate::phase::{phase_slope, unwrap_values};
use crate::transform::{circular_cross_correlation, forward_transform, forward_transform_at, ComplexSpectrum, TimeTrace};

#[derive(Debug, Clone, PartialEq)]
pub struct ResponseDecomposition {
    pub prompt: TimeTrace,
    pub delayed: TimeTrace,
    pub total_intensity: Vec<f64>,
}

impl ResponseDecomposition {
    fn new(prompt: TimeTrace, delayed: TimeTrace) -> Self {
        let total_intensity = prompt
            .values()
            .iter()
            .zip(delayed.values())
            .map(|(a, b)| (a + b).norm_sqr())
            .collect();
        ResponseDecomposition {
            prompt,
            delayed,
            total_intensity,
        }
    }
}

/// Closed-form prompt response: the difference of the two branch transforms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PromptResponse {
    plus: TwoPoleForm,
    minus: TwoPoleForm,
}

impl PromptResponse {
    pub fn new(p: &CavityParams) -> Result<Self> {
        Ok(PromptResponse {
            plus: to_two_pole(p, Branch::Plus)?,
            minus: to_two_pole(p, Branch::Minus)?,
        })
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.plus.transform(t) - self.minus.transform(t)
    }
}

pub fn r_delta_analytic(t: f64, p: &CavityParams) -> Result<Complex64> {
    Ok(PromptResponse::new(p)?.eval(t))
}

/// Numeric pipeline with the cavity spectrum and prompt trace precomputed, so
/// that many foil detunings can share them.
#[derive(Debug, Clone)]
pub struct DetectorModel {
    grid: FrequencyGrid,
    origin: f64,
    reflection: Vec<Complex64>,
    prompt: TimeTrace,
}

impl DetectorModel {
    /// `origin` is the time of the middle sample of the output traces.
    pub fn new(cavity: &CavityParams, grid: FrequencyGrid, origin: f64) -> Result<Self> {
        cavity.validate()?;
        let limit = cavity.kappa / 10.0;
        if grid.spacing() > limit {
            return Err(Error::Resolution {
                spacing: grid.spacing(),
                limit,
            });
        }
        let reflection = (0..grid.n_samples())
            .map(|j| cavity_reflection(grid.point(j), cavity))
            .collect();
        let prompt_fn = PromptResponse::new(cavity)?;
        let prompt = TimeTrace::from_fn(grid.conjugate(origin), |t| prompt_fn.eval(t));
        Ok(DetectorModel {
            grid,
            origin,
            reflection,
            prompt,
        })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn prompt(&self) -> &TimeTrace {
        &self.prompt
    }

    pub fn delayed(&self, foil: &FoilParams) -> TimeTrace {
        let values = (0..self.grid.n_samples())
            .map(|j| self.reflection[j] * foil_response_freq(self.grid.point(j), foil))
            .collect();
        let s = ComplexSpectrum::new(self.grid, values).expect("length matches grid");
        forward_transform_at(&s, self.origin)
    }

    pub fn decompose(&self, foil: &FoilParams) -> ResponseDecomposition {
        ResponseDecomposition::new(self.prompt.clone(), self.delayed(foil))
    }
}

/// Prompt and delayed response for the foil's Doppler detuning on the time
/// grid conjugate to `grid`, centered at t = 0.
pub fn detector_numeric(
    foil: &FoilParams,
    cavity: &CavityParams,
    grid: &FrequencyGrid,
) -> Result<ResponseDecomposition> {
    foil.validate()?;
    Ok(DetectorModel::new(cavity, *grid, 0.0)?.decompose(foil))
}

/// Delayed part in the linear-phase approximation: the foil response scaled
/// by R(Δ_D) and shifted by the group delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnxpResponse {
    pub amplitude: Complex64,
    pub tau: f64,
    pub reliable: bool,
    foil: FoilParams,
}

impl SnxpResponse {
    pub fn new(foil: &FoilParams, cavity: &CavityParams) -> Self {
        let gd = group_delay(foil.doppler_detuning, cavity);
        SnxpResponse {
            amplitude: gd.reflection,
            tau: gd.tau,
            reliable: gd.reliable,
            foil: *foil,
        }
    }

    pub fn with_delay(foil: &FoilParams, amplitude: Complex64, tau: f64) -> Self {
        SnxpResponse {
            amplitude,
            tau,
            reliable: true,
            foil: *foil,
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let s = t - self.tau;
        if s < 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let g = self.foil.linewidth;
        let phase = Complex64::from_polar((-g * s / 2.0).exp(), -self.foil.doppler_detuning * t);
        -(2.0 * PI).sqrt()
            * self.amplitude
            * phase
            * bessel_kernel(s, self.foil.effective_thickness * g)
    }

    pub fn intensity(&self, t: f64) -> f64 {
        self.eval(t).norm_sqr()
    }
}

/// Intensity `|r|²` of the linear-phase delayed response, which depends only
/// on |R(Δ_D)|², the delay and the foil thickness.
pub(crate) fn snxp_intensity(t: f64, tau: f64, amplitude_sqr: f64, thickness: f64) -> f64 {
    let s = t - tau;
    if s < 0.0 {
        return 0.0;
    }
    let k = bessel_kernel(s, thickness);
    2.0 * PI * amplitude_sqr * (-s).exp() * k * k
}

pub fn r_snxp_analytic(t: f64, foil: &FoilParams, cavity: &CavityParams) -> Complex64 {
    SnxpResponse::new(foil, cavity).eval(t)
}

/// Spectral amplitude of a Gaussian pulse with the given full width at half
/// maximum.
pub fn gaussian_pulse(grid: &FrequencyGrid, center: f64, fwhm: f64) -> ComplexSpectrum {
    let sigma = fwhm / (2.0 * (2.0 * LN_2).sqrt());
    ComplexSpectrum::from_fn(*grid, |d| {
        Complex64::new((-(d - center).powi(2) / (2.0 * sigma * sigma)).exp(), 0.0)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseDelay {
    /// Lag of the reflected intensity relative to the incident one.
    pub lag: f64,
    /// Normalized L2 mismatch of the envelopes after undoing the lag.
    pub distortion: f64,
    /// Largest deviation of arg R from its tangent over the pulse band.
    pub phase_nonlinearity: f64,
    /// Spread of |R| over the pulse band relative to its value at the center.
    pub amplitude_variation: f64,
    /// False when the reflection is not close to constant-amplitude,
    /// linear-phase across the pulse band.
    pub linear_phase_valid: bool,
}

const SUPPORT_FRACTION: f64 = 0.01;
const MAX_PHASE_NONLINEARITY: f64 = 0.1;
const MAX_AMPLITUDE_VARIATION: f64 = 0.25;

/// Reflect `pulse` off the cavity and measure how far its intensity moves.
pub fn pulse_delay_theorem_check(pulse: &ComplexSpectrum, cavity: &CavityParams) -> Result<PulseDelay> {
    pulse_delay_with(pulse, |d| cavity_reflection(d, cavity))
}

/// As [`pulse_delay_theorem_check`] for an arbitrary reflection function.
pub fn pulse_delay_with(
    pulse: &ComplexSpectrum,
    reflection: impl Fn(f64) -> Complex64,
) -> Result<PulseDelay> {
    let grid = *pulse.grid();
    let peak = pulse.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::EmptyData("pulse spectrum is zero".into()));
    }
    let support: Vec<usize> = (0..grid.n_samples())
        .filter(|&j| pulse.values()[j].norm() >= SUPPORT_FRACTION * peak)
        .collect();
    let weight: f64 = support.iter().map(|&j| pulse.values()[j].norm_sqr()).sum();
    let center = support
        .iter()
        .map(|&j| grid.point(j) * pulse.values()[j].norm_sqr())
        .sum::<f64>()
        / weight;

    let r_center = reflection(center);
    let slope = phase_slope(&reflection, center, 1e-3);
    let band: Vec<Complex64> = support.iter().map(|&j| reflection(grid.point(j))).collect();
    let phases = unwrap_values(&band)?;
    let center_phase = {
        let reference = band[0].conj();
        phases[0] + (r_center * reference).arg()
    };
    let phase_nonlinearity = support
        .iter()
        .zip(&phases)
        .map(|(&j, ph)| (ph - center_phase - slope * (grid.point(j) - center)).abs())
        .fold(0.0, f64::max);
    let (lo, hi) = band
        .iter()
        .map(|v| v.norm())
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), m| (lo.min(m), hi.max(m)));
    let amplitude_variation = (hi - lo) / r_center.norm();

    let incident = forward_transform(pulse);
    let reflected = forward_transform(&pulse.map(|d, v| v * reflection(d)));
    let i1 = incident.intensity();
    let i2 = reflected.intensity();
    let corr = circular_cross_correlation(&i2, &i1)?;
    let n = corr.len();
    let best = (0..n).max_by(|&a, &b| corr[a].total_cmp(&corr[b])).unwrap_or(0);
    let (cm, c0, cp) = (corr[(best + n - 1) % n], corr[best], corr[(best + 1) % n]);
    let denom = cm - 2.0 * c0 + cp;
    let frac = if denom != 0.0 { 0.5 * (cm - cp) / denom } else { 0.0 };
    let bins = if best > n / 2 { best as f64 - n as f64 } else { best as f64 };
    let dt = incident.grid().spacing();
    let lag = (bins + frac) * dt;

    let shifted = forward_transform(&pulse.map(|d, v| v * Complex64::from_polar(1.0, d * lag)));
    let a: Vec<f64> = reflected.values().iter().map(|v| v.norm()).collect();
    let b: Vec<f64> = shifted.values().iter().map(|v| v.norm()).collect();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    let scale = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / bb;
    let mismatch: f64 = a.iter().zip(&b).map(|(x, y)| (x - scale * y).powi(2)).sum();
    let norm: f64 = a.iter().map(|x| x * x).sum();
    let distortion = (mismatch / norm).sqrt();

    Ok(PulseDelay {
        lag,
        distortion,
        phase_nonlinearity,
        amplitude_variation,
        linear_phase_valid: phase_nonlinearity <= MAX_PHASE_NONLINEARITY
            && amplitude_variation <= MAX_AMPLITUDE_VARIATION,
    })
}
