//! Reference computations that do not go through the library's closed forms.
#![allow(dead_code)]

use std::f64::consts::PI;

use snxp::foil::FoilParams;
use snxp::grid::FrequencyGrid;
use snxp::Complex64;

pub const J1_ZEROS: [f64; 3] = [3.831_705_970_2, 7.015_586_669_8, 10.173_468_135_1];

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn relative_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let norm: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (diff / norm).sqrt()
}

/// `Σ_q 1/(Δ + 2Wq + i/2)`: a Lorentzian repeated with the period 2W of a
/// frequency grid, in closed form `(π/2W)·cot(π(Δ + i/2)/2W)`.
pub fn periodized_lorentzian(delta: f64, half_span: f64) -> Complex64 {
    let z = c(delta, 0.5) * (PI / (2.0 * half_span));
    z.cos() / z.sin() * (PI / (2.0 * half_span))
}

/// Transform of [`periodized_lorentzian`] sampled on the conjugate grid:
/// `−i√2π e^{−t/2}` repeated with period `span`, with the step at t = 0
/// taken at its midpoint.
pub fn periodized_decay(t: f64, span: f64) -> Complex64 {
    let amp = -(2.0 * PI).sqrt();
    let tail = (-span / 2.0).exp() / (1.0 - (-span / 2.0).exp());
    let u = t.rem_euclid(span);
    let v = if u == 0.0 {
        0.5 + tail
    } else {
        (-u / 2.0).exp() / (1.0 - (-span / 2.0).exp())
    };
    c(0.0, amp * v)
}

/// `E_ν(u) = u^{−ν/2} J_ν(2√u) = Σ_m (−u)^m / (m! (m+ν)!)`.
pub fn bessel_e(nu: u32, u: f64) -> f64 {
    let mut term: f64 = 1.0 / (1..=nu).map(|k| k as f64).product::<f64>();
    let mut sum = term;
    for m in 1..200 {
        term *= -u / (m as f64 * (m + nu) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// The foil response in time written with `E₁`: `−C₀ e^{−βt} E₁(Lt/4)` for
/// t ≥ 0, `C₀ = (L/2)√(π/2)`, `β = 1/2 + iΔ_D`.
pub fn foil_time_series(t: f64, foil: &FoilParams) -> Complex64 {
    if t < 0.0 {
        return c(0.0, 0.0);
    }
    let l = foil.effective_thickness;
    let beta = c(0.5, foil.doppler_detuning);
    -(l / 2.0) * (PI / 2.0).sqrt() * (-beta * t).exp() * bessel_e(1, l * t / 4.0)
}

/// Local model of the gated foil response near the gate at `open`, with a
/// closed-form spectrum.
///
/// `h(t) = θ(t−τ)(−C₀)e^{−βτ} e^{−(β+α)s} Σ_{k≤K} p_k s^k`, `s = t − τ`,
/// matches the response through order K at the gate and decays fast, so the
/// sampled remainder `f − h` is smooth enough for a plain FFT while `h` is
/// transformed exactly.
pub struct GateModel {
    open: f64,
    beta: Complex64,
    alpha: f64,
    lead: Complex64,
    p: Vec<f64>,
}

impl GateModel {
    pub fn new(foil: &FoilParams, open: f64, order: usize) -> Self {
        let l = foil.effective_thickness;
        let beta = c(0.5, foil.doppler_detuning);
        let alpha = l / 4.0 + 1.0;
        let u0 = l * open / 4.0;
        // Taylor coefficients of E₁(L(τ+s)/4) in s, using E_ν' = −E_{ν+1}.
        let mut a = Vec::with_capacity(order + 1);
        let mut fact = 1.0;
        for k in 0..=order {
            if k > 0 {
                fact *= k as f64;
            }
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            a.push(sign * bessel_e(k as u32 + 1, u0) * (l / 4.0).powi(k as i32) / fact);
        }
        // Multiply by e^{αs} so that the e^{−αs} envelope is compensated.
        let mut e = Vec::with_capacity(order + 1);
        let mut fact = 1.0;
        for k in 0..=order {
            if k > 0 {
                fact *= k as f64;
            }
            e.push(alpha.powi(k as i32) / fact);
        }
        let p = (0..=order)
            .map(|k| (0..=k).map(|i| a[i] * e[k - i]).sum())
            .collect();
        let lead = -(l / 2.0) * (PI / 2.0).sqrt() * (-beta * open).exp();
        GateModel {
            open,
            beta,
            alpha,
            lead,
            p,
        }
    }

    pub fn time(&self, t: f64) -> Complex64 {
        if t < self.open {
            return c(0.0, 0.0);
        }
        let s = t - self.open;
        let poly: f64 = self.p.iter().rev().fold(0.0, |acc, &pk| acc * s + pk);
        self.lead * (-(self.beta + self.alpha) * s).exp() * poly
    }

    /// `(1/√2π) ∫ h(t) e^{iΔt} dt`.
    pub fn spectrum(&self, delta: f64) -> Complex64 {
        let d = self.beta + self.alpha - c(0.0, delta);
        let mut fact = 1.0;
        let mut sum = c(0.0, 0.0);
        let mut pow = d;
        for (k, &pk) in self.p.iter().enumerate() {
            if k > 0 {
                fact *= k as f64;
                pow *= d;
            }
            sum += pk * fact / pow;
        }
        self.lead * Complex64::from_polar(1.0, delta * self.open) * sum / (2.0 * PI).sqrt()
    }
}

/// Nested refinement of the default grid: 16× the span at 4× the spacing.
/// Its time samples include every default-grid time sample.
pub fn refined_grid() -> FrequencyGrid {
    FrequencyGrid::new(1 << 20, 0.0625, 0.0).unwrap()
}
