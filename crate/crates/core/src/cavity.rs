//! Thin-film x-ray cavity with a hyperfine-split ⁵⁷Fe layer in Faraday
//! geometry, observed between crossed polarizers.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::exec::Exec;
use crate::phase::phase_slope;

pub const DEFAULT_PHASE_STEP: f64 = 1e-3;
/// Delays are flagged unreliable where |R| is below this fraction of max |R|.
pub const RELIABILITY_FLOOR: f64 = 1e-6;
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub kappa: f64,
    pub kappa_r: f64,
    pub delta_c: f64,
    pub g2n: f64,
    pub delta_g: f64,
    pub delta_e: f64,
}

impl Default for CavityParams {
    fn default() -> Self {
        CavityParams {
            kappa: 45.0,
            kappa_r: 22.5,
            delta_c: -28.1,
            g2n: 3285.0,
            delta_g: 22.4,
            delta_e: 39.7,
        }
    }
}

impl CavityParams {
    /// Default splittings and in/out coupling κ/2.
    pub fn new(kappa: f64, delta_c: f64, g2n: f64) -> Result<Self> {
        let p = CavityParams {
            kappa,
            kappa_r: kappa / 2.0,
            delta_c,
            g2n,
            ..CavityParams::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("kappa", self.kappa),
            ("kappa_r", self.kappa_r),
            ("delta_c", self.delta_c),
            ("g2n", self.g2n),
            ("delta_g", self.delta_g),
            ("delta_e", self.delta_e),
        ] {
            ensure_finite(name, v)?;
        }
        if self.kappa <= 0.0 {
            return Err(Error::invalid("kappa", "must be positive"));
        }
        if self.kappa_r <= 0.0 {
            return Err(Error::invalid("kappa_r", "must be positive"));
        }
        if self.g2n < 0.0 {
            return Err(Error::invalid("g2n", "must be ≥ 0"));
        }
        Ok(())
    }

    fn coupling(&self) -> (Complex64, Complex64) {
        let k = Complex64::new(self.kappa, self.delta_c);
        let b = self.g2n / k;
        (self.kappa_r * b / k, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    /// (bare amplitude, pole offset) of both lines of the branch.
    fn lines(self, p: &CavityParams) -> [(f64, f64); 2] {
        let (g, e) = (p.delta_g / 2.0, p.delta_e / 2.0);
        match self {
            Branch::Plus => [(1.0 / 3.0, -g + e), (1.0, g + 3.0 * e)],
            Branch::Minus => [(1.0, -g - 3.0 * e), (1.0 / 3.0, g - e)],
        }
    }
}

fn line(delta: f64, offset: f64) -> Complex64 {
    1.0 / Complex64::new(delta + offset, 0.5)
}

/// Nuclear scattering amplitudes (F₊, F₋) of the two circular polarizations.
pub fn scattering_amplitudes(delta: f64, p: &CavityParams) -> (Complex64, Complex64) {
    let amp = |b: Branch| {
        b.lines(p)
            .iter()
            .map(|&(a, d)| a * line(delta, d))
            .sum::<Complex64>()
    };
    (amp(Branch::Plus), amp(Branch::Minus))
}

/// `A/(2/F + iB)` written so that F = 0 gives 0.
fn dressed(f: Complex64, a: Complex64, b: Complex64) -> Complex64 {
    a * f / (2.0 + I * b * f)
}

/// Cross-polarized reflection `R_F(F₊) − R_F(F₋)`.
pub fn cavity_reflection(delta: f64, p: &CavityParams) -> Complex64 {
    let (a, b) = p.coupling();
    let (fp, fm) = scattering_amplitudes(delta, p);
    dressed(fp, a, b) - dressed(fm, a, b)
}

/// Reflection of a single branch, `R_F(F_branch)`.
pub fn branch_reflection(delta: f64, p: &CavityParams, branch: Branch) -> Complex64 {
    let (a, b) = p.coupling();
    let (fp, fm) = scattering_amplitudes(delta, p);
    dressed(
        match branch {
            Branch::Plus => fp,
            Branch::Minus => fm,
        },
        a,
        b,
    )
}

/// Maximum of |R| over detuning, from a scan of ±1024γ in steps of γ/8.
pub fn peak_reflection(p: &CavityParams) -> f64 {
    (-8192..=8192)
        .map(|j| cavity_reflection(j as f64 / 8.0, p).norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupDelay {
    pub detuning: f64,
    pub tau: f64,
    /// R at the detuning.
    pub reflection: Complex64,
    /// False where |R| is too small for its phase to mean anything.
    pub reliable: bool,
}

/// Derivative of arg R at `delta_d`, five-point stencil with the default step.
pub fn group_delay(delta_d: f64, p: &CavityParams) -> GroupDelay {
    group_delay_with(delta_d, p, DEFAULT_PHASE_STEP, peak_reflection(p))
}

/// Like [`group_delay`] with an explicit stencil step and a precomputed max |R|.
pub fn group_delay_with(delta_d: f64, p: &CavityParams, step: f64, peak: f64) -> GroupDelay {
    let reflection = cavity_reflection(delta_d, p);
    let tau = phase_slope(|d| cavity_reflection(d, p), delta_d, step);
    let magnitude = reflection.norm();
    GroupDelay {
        detuning: delta_d,
        tau,
        reflection,
        reliable: magnitude > 0.0 && magnitude >= RELIABILITY_FLOOR * peak,
    }
}

pub fn group_delay_curve(detunings: &[f64], p: &CavityParams, exec: Exec) -> Vec<GroupDelay> {
    let peak = peak_reflection(p);
    exec.map(detunings.len(), |i| {
        group_delay_with(detunings[i], p, DEFAULT_PHASE_STEP, peak)
    })
}

/// Constant-amplitude, linear-phase approximation of R around `delta_d`.
pub fn linearized_reflection(delta: f64, delta_d: f64, p: &CavityParams) -> Complex64 {
    let gd = group_delay(delta_d, p);
    gd.reflection * Complex64::from_polar(1.0, (delta - delta_d) * gd.tau)
}

/// Which square root of Ω̃² to use. The transform does not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Root {
    #[default]
    Principal,
    Negated,
}

/// `R̃(Δ) = [2(c₁/(Δ+δ₁+iγ/2) + c₂/(Δ+δ₂+iγ/2))⁻¹ + c₀]⁻¹`, the form taken by
/// each branch of the cavity reflection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPoleForm {
    pub c0: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub delta1: f64,
    pub delta2: f64,
}

pub fn to_two_pole(p: &CavityParams, branch: Branch) -> Result<TwoPoleForm> {
    let [(a1, d1), (a2, d2)] = branch.lines(p);
    let (a, _) = p.coupling();
    // iB/A simplifies to i(κ + iΔ_C)/κ_R, which stays finite when g2N = 0.
    let c0 = I * Complex64::new(p.kappa, p.delta_c) / p.kappa_r;
    if !(c0.re.is_finite() && c0.im.is_finite()) || !(a.re.is_finite() && a.im.is_finite()) {
        return Err(Error::DegenerateMapping(format!(
            "coupling constants are not finite (κ_R = {})",
            p.kappa_r
        )));
    }
    Ok(TwoPoleForm {
        c0,
        c1: a * a1,
        c2: a * a2,
        delta1: d1,
        delta2: d2,
    })
}

impl TwoPoleForm {
    pub fn eval(&self, delta: f64) -> Complex64 {
        let u1 = Complex64::new(delta + self.delta1, 0.5);
        let u2 = Complex64::new(delta + self.delta2, 0.5);
        let num = self.c1 * u2 + self.c2 * u1;
        num / (2.0 * u1 * u2 + self.c0 * num)
    }

    fn sum(&self) -> Complex64 {
        self.c1 + self.c2
    }

    pub fn gamma_tilde(&self) -> Complex64 {
        1.0 - 0.5 * I * self.c0 * self.sum() - I * (self.delta1 + self.delta2)
    }

    pub fn omega_tilde_squared(&self) -> Complex64 {
        let dd = self.delta1 - self.delta2;
        let s = self.sum();
        dd * dd + (self.c0 / 2.0).powi(2) * s * s + self.c0 * dd * (self.c1 - self.c2)
    }

    pub fn omega_tilde(&self, root: Root) -> Complex64 {
        let w = self.omega_tilde_squared().sqrt();
        match root {
            Root::Principal => w,
            Root::Negated => -w,
        }
    }

    fn domega_numerator(&self) -> Complex64 {
        let s = self.sum();
        self.c0 / 2.0 * s * s + (self.delta1 - self.delta2) * (self.c1 - self.c2)
    }

    /// ∂Ω̃/∂c₀ of the closed form for Ω̃.
    pub fn domega_dc0(&self, root: Root) -> Complex64 {
        self.domega_numerator() / (2.0 * self.omega_tilde(root))
    }

    /// The two poles of R̃ in the complex Δ plane.
    pub fn poles(&self) -> [Complex64; 2] {
        let centre = Complex64::new(-(self.delta1 + self.delta2) / 2.0, -0.5) - self.c0 * self.sum() / 4.0;
        let half = self.omega_tilde(Root::Principal) / 2.0;
        [centre + half, centre - half]
    }

    /// Time response `√(π/2) e^{−Γ̃t/2} [2 ∂Ω̃/∂c₀ sin(Ω̃t/2) − i(c₁+c₂) cos(Ω̃t/2)]`
    /// for t ≥ 0 and 0 before.
    pub fn transform(&self, t: f64) -> Complex64 {
        self.transform_with_root(t, Root::Principal)
    }

    pub fn transform_with_root(&self, t: f64, root: Root) -> Complex64 {
        if t < 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let g = self.gamma_tilde();
        let w = self.omega_tilde(root);
        let s = self.sum();
        let ep = ((-g + I * w) * t / 2.0).exp();
        let em = ((-g - I * w) * t / 2.0).exp();
        // 2 ∂Ω̃/∂c₀ sin(Ω̃t/2) = X · (e₊ − e₋)/(2iΩ̃) with X the numerator of ∂Ω̃/∂c₀.
        let sine_part = if (w * t).norm() < 1e-6 {
            (-g * t / 2.0).exp() * t / 2.0 * (1.0 - (w * t).powi(2) / 24.0)
        } else {
            (ep - em) / (2.0 * I * w)
        };
        (PI / 2.0).sqrt() * (self.domega_numerator() * sine_part - 0.5 * I * s * (ep + em))
    }
}

/// Phase thickness `ω₀·ℓ/(2c)` of a medium of length `medium_length_m`
/// (metres) at photon energy `photon_energy_kev`.
pub fn phase_thickness(medium_length_m: f64, photon_energy_kev: f64) -> Result<f64> {
    const HBAR_EV_S: f64 = 6.582_119_569e-16;
    const C_M_S: f64 = 299_792_458.0;
    if !(medium_length_m > 0.0 && photon_energy_kev > 0.0)
        || !medium_length_m.is_finite()
        || !photon_energy_kev.is_finite()
    {
        return Err(Error::invalid(
            "medium_length",
            "length and photon energy must be positive",
        ));
    }
    let omega0 = photon_energy_kev * 1e3 / HBAR_EV_S;
    Ok(omega0 * medium_length_m / (2.0 * C_M_S))
}

/// Effective susceptibility that reproduces R through `R = exp(i k χ)`,
/// `k = ω₀ℓ/(2c)`. The frequency derivative is per γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Susceptibility {
    pub chi_im: f64,
    pub dchi_re_dw: f64,
    pub phase_thickness: f64,
}

impl Susceptibility {
    pub fn from_reflection(r: Complex64, phase_slope: f64, phase_thickness: f64) -> Result<Self> {
        let m = r.norm();
        if m == 0.0 || !m.is_finite() {
            return Err(Error::LogSingularity);
        }
        Ok(Susceptibility {
            chi_im: -m.ln() / phase_thickness,
            dchi_re_dw: phase_slope / phase_thickness,
            phase_thickness,
        })
    }

    /// `exp(ikχ)` for a complex susceptibility `chi`.
    pub fn reflection(chi: Complex64, phase_thickness: f64) -> Complex64 {
        (I * phase_thickness * chi).exp()
    }

    /// |R| implied by the imaginary part.
    pub fn amplitude(&self) -> f64 {
        Self::reflection(Complex64::new(0.0, self.chi_im), self.phase_thickness).norm()
    }

    /// Phase slope implied by the real-part derivative.
    pub fn phase_slope(&self) -> f64 {
        self.phase_thickness * self.dchi_re_dw
    }
}

/// Susceptibility of a medium of length `medium_length_m` that reflects like
/// the cavity at `delta0`.
pub fn susceptibility_map(
    delta0: f64,
    p: &CavityParams,
    medium_length_m: f64,
    photon_energy_kev: f64,
) -> Result<Susceptibility> {
    let k = phase_thickness(medium_length_m, photon_energy_kev)?;
    let gd = group_delay(delta0, p);
    Susceptibility::from_reflection(gd.reflection, gd.tau, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pole_positions() {
        let p = CavityParams::default();
        let [(_, a), (_, b)] = Branch::Plus.lines(&p);
        assert!((-a - -8.65).abs() < 1e-12 && (-b - -70.75).abs() < 1e-12);
        let [(_, c), (_, d)] = Branch::Minus.lines(&p);
        assert!((c - (-11.2 - 59.55)).abs() < 1e-12 && (d - (11.2 - 19.85)).abs() < 1e-12);
    }

    #[test]
    fn degenerate_lines_cancel() {
        let p = CavityParams {
            delta_g: 0.0,
            delta_e: 0.0,
            ..CavityParams::default()
        };
        for &d in &[-40.0, 0.0, 3.3] {
            let (fp, fm) = scattering_amplitudes(d, &p);
            assert!((fp - fm).norm() < 1e-15);
            assert!((fp - (4.0 / 3.0) / Complex64::new(d, 0.5)).norm() < 1e-14);
            assert_eq!(cavity_reflection(d, &p), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn reference_reflection_at_zero() {
        let r = cavity_reflection(0.0, &CavityParams::default());
        assert!((r - Complex64::new(0.393_352_302_078_215, 0.119_357_582_181_056_8)).norm() < 1e-12, "{r}");
        assert!(cavity_reflection(1e4, &CavityParams::default()).norm() < 1e-3);
    }

    #[test]
    fn no_nuclei_no_signal() {
        let p = CavityParams::new(45.0, -28.1, 0.0).unwrap();
        assert_eq!(cavity_reflection(2.0, &p), Complex64::new(0.0, 0.0));
        assert_eq!(linearized_reflection(2.0, 1.0, &p), Complex64::new(0.0, 0.0));
        let tp = to_two_pole(&p, Branch::Plus).unwrap();
        assert_eq!(tp.c1, Complex64::new(0.0, 0.0));
        assert_eq!(tp.c2, Complex64::new(0.0, 0.0));
        assert!(!group_delay(0.0, &p).reliable);
    }

    #[test]
    fn two_pole_matches_branch() {
        let p = CavityParams::default();
        for branch in [Branch::Plus, Branch::Minus] {
            let tp = to_two_pole(&p, branch).unwrap();
            for j in -50..50 {
                let d = j as f64 * 1.7;
                let want = branch_reflection(d, &p, branch);
                assert!((tp.eval(d) - want).norm() <= 1e-12 * want.norm());
            }
            for pole in tp.poles() {
                assert!(pole.im < 0.0, "pole {pole} is not causal");
            }
        }
    }

    #[test]
    fn transform_ignores_root_choice() {
        let tp = to_two_pole(&CavityParams::default(), Branch::Minus).unwrap();
        for &t in &[0.0, 0.01, 0.3, 2.0] {
            let a = tp.transform_with_root(t, Root::Principal);
            let b = tp.transform_with_root(t, Root::Negated);
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn delay_off_resonance_is_tiny() {
        let p = CavityParams::default();
        for &d in &[-500.0, 500.0] {
            assert!(group_delay(d, &p).tau.abs() < 1e-3);
        }
    }

    #[test]
    fn susceptibility_round_trip() {
        let s = Susceptibility::from_reflection(Complex64::from_polar(1.0, 0.3), 0.2, 5.0).unwrap();
        assert_eq!(s.chi_im, 0.0);
        assert!((s.phase_slope() - 0.2).abs() < 1e-15);
        assert!(matches!(
            Susceptibility::from_reflection(Complex64::new(0.0, 0.0), 0.1, 1.0),
            Err(Error::LogSingularity)
        ));
        assert!(phase_thickness(0.0, 14.4).is_err());
    }
}
