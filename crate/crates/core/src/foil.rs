//! Resonant ⁵⁷Fe foil driven at a Doppler detuning, and the chopper-gated
//! spectrally narrow pulse it produces from a broadband excitation.
//!
//! In time the foil response is `δ(t) + smooth(t)`. The δ part is never
//! sampled: spectra carry it as the constant 1, which callers subtract before
//! transforming.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::special::{bessel_j1, expm1, regularized_lower_gamma};

/// Effective thickness of the foil used in the reference measurement.
pub const REFERENCE_THICKNESS: f64 = 126.3;
/// Term cap of the chopper series.
pub const MAX_SERIES_TERMS: u32 = 400;
/// Below this value of `L·γ·t` the Bessel kernel switches to its series.
const KERNEL_SERIES_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoilParams {
    pub effective_thickness: f64,
    pub doppler_detuning: f64,
    pub linewidth: f64,
}

impl Default for FoilParams {
    fn default() -> Self {
        FoilParams {
            effective_thickness: REFERENCE_THICKNESS,
            doppler_detuning: 0.0,
            linewidth: 1.0,
        }
    }
}

impl FoilParams {
    pub fn new(effective_thickness: f64, doppler_detuning: f64) -> Result<Self> {
        let p = FoilParams {
            effective_thickness,
            doppler_detuning,
            linewidth: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn at_detuning(self, doppler_detuning: f64) -> Self {
        FoilParams {
            doppler_detuning,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("effective_thickness", self.effective_thickness)?;
        ensure_finite("doppler_detuning", self.doppler_detuning)?;
        if self.effective_thickness < 0.0 {
            return Err(Error::invalid("effective_thickness", "must be ≥ 0"));
        }
        if !(self.linewidth > 0.0 && self.linewidth.is_finite()) {
            return Err(Error::invalid("linewidth", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChopperParams {
    pub open_time: f64,
}

impl ChopperParams {
    pub fn new(open_time: f64) -> Result<Self> {
        if !(open_time >= 0.0 && open_time.is_finite()) {
            return Err(Error::invalid("open_time", "must be finite and ≥ 0"));
        }
        Ok(ChopperParams { open_time })
    }
}

/// Microscopic foil properties from which the effective thickness follows as
/// `L = σ₀ · f_LM · n · d`.
///
/// Only `d` = 10 µm and the product L = 126.3 are known for the reference
/// foil; σ₀ and f_LM take textbook ⁵⁷Fe values and the ⁵⁷Fe number density
/// is chosen so that the defaults reproduce L = 126.3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoilComposition {
    /// Resonant cross section in cm².
    pub cross_section_cm2: f64,
    pub lamb_moessbauer: f64,
    /// Resonant nuclei per cm³.
    pub number_density_cm3: f64,
    pub thickness_cm: f64,
}

impl Default for FoilComposition {
    fn default() -> Self {
        let cross_section_cm2 = 2.56e-18;
        let lamb_moessbauer = 0.8;
        let thickness_cm = 1e-3;
        FoilComposition {
            cross_section_cm2,
            lamb_moessbauer,
            number_density_cm3: REFERENCE_THICKNESS
                / (cross_section_cm2 * lamb_moessbauer * thickness_cm),
            thickness_cm,
        }
    }
}

impl FoilComposition {
    pub fn effective_thickness(&self) -> Result<f64> {
        let l = self.cross_section_cm2
            * self.lamb_moessbauer
            * self.number_density_cm3
            * self.thickness_cm;
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::invalid(
                "effective_thickness",
                format!("foil composition gives L = {l}"),
            ));
        }
        Ok(l)
    }
}

/// Exponent of the foil transmission, `−(iLγ/4)/(Δ − Δ_D + iγ/2)`.
fn exponent(delta: f64, p: &FoilParams) -> Complex64 {
    let g = p.linewidth;
    Complex64::new(0.0, -p.effective_thickness * g / 4.0)
        / Complex64::new(delta - p.doppler_detuning, g / 2.0)
}

pub fn foil_transmission_freq(delta: f64, p: &FoilParams) -> Complex64 {
    exponent(delta, p).exp()
}

/// `T_foil(Δ) − 1`, accurate also far from resonance where it is tiny.
pub fn foil_response_freq(delta: f64, p: &FoilParams) -> Complex64 {
    expm1(exponent(delta, p))
}

/// `√(l/(4s)) · J₁(√(l·s))` for `s ≥ 0`, with its finite limit `l/4` at s = 0.
pub(crate) fn bessel_kernel(s: f64, l: f64) -> f64 {
    let x = l * s;
    if x < KERNEL_SERIES_LIMIT {
        l / 4.0 * (1.0 - x / 8.0)
    } else {
        (l / (4.0 * s)).sqrt() * bessel_j1(x.sqrt())
    }
}

/// Smooth (non-δ) part of the foil response in time,
/// `−θ(t) e^{−γt/2 − iΔ_D t} √(πLγ/(2t)) J₁(√(Lγt))`.
///
/// At t = 0 the right-hand limit `−√(π/2)·Lγ/2` is returned.
pub fn foil_transmission_time_smooth(t: f64, p: &FoilParams) -> Complex64 {
    if t < 0.0 || p.effective_thickness == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let g = p.linewidth;
    let envelope = Complex64::new(-g * t / 2.0, -p.doppler_detuning * t).exp();
    -envelope * (2.0 * PI).sqrt() * bessel_kernel(t, p.effective_thickness * g)
}

/// The pulse after a chopper that opens at `open_time`: the smooth foil
/// response for `t ≥ open_time`, zero before.
pub fn chopper_transmission_time(t: f64, c: &ChopperParams, p: &FoilParams) -> Complex64 {
    if t < c.open_time {
        Complex64::new(0.0, 0.0)
    } else {
        foil_transmission_time_smooth(t, p)
    }
}

/// Spectrum of the chopper-gated pulse,
/// `Σ_{n≥1} xⁿ/n! · Γ(n, z)/(n−1)!` with `x` the foil exponent and
/// `z = (γ/2 − i(Δ − Δ_D))·τ_chop`.
///
/// The terms of that series grow to ~e^{L/2} for thick foils before they
/// decay, so it is summed in the equivalent form
/// `(e^x − 1) − Σ_{n≥1} xⁿ/n! · P(n, z)` where `P = 1 − Γ(n, z)/(n−1)!` is
/// small until n exceeds |z|.
pub fn chopper_transmission_freq(
    delta: f64,
    c: &ChopperParams,
    p: &FoilParams,
    tol: f64,
) -> Result<Complex64> {
    if !(tol > 0.0) {
        return Err(Error::invalid("tol", "must be positive"));
    }
    if p.effective_thickness == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let x = exponent(delta, p);
    let total = expm1(x);
    if c.open_time == 0.0 {
        return Ok(total);
    }
    let z = Complex64::new(p.linewidth / 2.0, -(delta - p.doppler_detuning)) * c.open_time;
    // Terms may grow until n passes both |x| and √|xz|.
    let settle = x.norm().max((x.norm() * z.norm()).sqrt()) + 1.0;
    let mut coef = Complex64::new(1.0, 0.0);
    let mut head = Complex64::new(0.0, 0.0);
    let mut last = 0.0;
    for n in 1..=MAX_SERIES_TERMS {
        coef *= x / n as f64;
        let term = coef * regularized_lower_gamma(n, z)?;
        head += term;
        last = term.norm();
        if n as f64 > settle && last < tol * (total - head).norm() {
            return Ok(total - head);
        }
        if coef.norm() == 0.0 {
            return Ok(total - head);
        }
    }
    Err(Error::Truncation {
        terms: MAX_SERIES_TERMS as usize,
        last_term: last,
    })
}
