//! Natural units (γ = 1) and conversion to laboratory units.

use serde::{Deserialize, Serialize};

/// Single-nucleus linewidth of the 14.4 keV ⁵⁷Fe transition.
pub const GAMMA_NEV: f64 = 4.7;
/// ħ in neV·ns.
pub const HBAR_NEV_NS: f64 = 658.211_956_9;
/// Transition energy; carried as metadata only.
pub const OMEGA0_KEV: f64 = 14.4;
/// Start of the analysis window. Earlier times are dominated by the prompt
/// response and are excluded from every fit.
pub const GATE_START_NS: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub gamma_nev: f64,
    pub hbar_nev_ns: f64,
    pub omega0_kev: f64,
}

impl Default for Units {
    fn default() -> Self {
        Units {
            gamma_nev: GAMMA_NEV,
            hbar_nev_ns: HBAR_NEV_NS,
            omega0_kev: OMEGA0_KEV,
        }
    }
}

impl Units {
    /// Length of one natural time unit (1/γ) in ns, ≈ 140.05.
    pub fn ns_per_time_unit(&self) -> f64 {
        self.hbar_nev_ns / self.gamma_nev
    }

    pub fn time_to_ns(&self, t: f64) -> f64 {
        t * self.ns_per_time_unit()
    }

    pub fn time_from_ns(&self, ns: f64) -> f64 {
        ns / self.ns_per_time_unit()
    }

    pub fn energy_to_nev(&self, delta: f64) -> f64 {
        delta * self.gamma_nev
    }

    pub fn energy_from_nev(&self, nev: f64) -> f64 {
        nev / self.gamma_nev
    }
}

/// The 50 ns analysis gate in natural units (≈ 0.357/γ).
pub fn gate_start() -> f64 {
    Units::default().time_from_ns(GATE_START_NS)
}
