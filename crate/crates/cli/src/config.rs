//! Run configuration in user-facing units.

use serde::{Deserialize, Serialize};
use snxp::cavity::CavityParams;
use snxp::fit::FitSettings;
use snxp::foil::{ChopperParams, FoilParams};
use snxp::synth::{SignalModel, SweepConfig};
use snxp::units::Units;

/// How time-valued parameters and outputs are expressed. Frequencies are
/// always multiples of γ so that axes line up with the usual figures; the
/// physical mode adds neV columns next to them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum UnitMode {
    /// Times in 1/γ.
    #[default]
    Natural,
    /// Times in ns.
    Physical,
}

impl UnitMode {
    pub fn is_physical(self) -> bool {
        self == UnitMode::Physical
    }

    /// Natural time to this mode.
    pub fn time_out(self, t: f64) -> f64 {
        match self {
            UnitMode::Natural => t,
            UnitMode::Physical => Units::default().time_to_ns(t),
        }
    }

    /// Time in this mode to natural units.
    pub fn time_in(self, t: f64) -> f64 {
        match self {
            UnitMode::Natural => t,
            UnitMode::Physical => Units::default().time_from_ns(t),
        }
    }

    pub fn time_suffix(self) -> &'static str {
        match self {
            UnitMode::Natural => "",
            UnitMode::Physical => "_ns",
        }
    }
}

/// Sampling of the `spectrum` command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRange {
    /// Half-width of the detuning axis around the foil's Doppler detuning.
    pub detuning_span: f64,
    pub n_points: usize,
    pub time_max: f64,
    pub n_time_points: usize,
}

impl Default for SpectrumRange {
    fn default() -> Self {
        SpectrumRange {
            detuning_span: 100.0,
            n_points: 2001,
            time_max: 2.0,
            n_time_points: 1001,
        }
    }
}

/// Every parameter of every command. Time-valued fields are in the units of
/// `units`; everything else is unit-free or in multiples of γ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub units: UnitMode,
    pub foil: FoilParams,
    pub chopper: ChopperParams,
    pub cavity: CavityParams,
    pub sweep: SweepConfig,
    /// Signal the `synth` command draws counts from.
    pub model: SignalModel,
    pub fit: FitSettings,
    pub spectrum: SpectrumRange,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            units: UnitMode::Natural,
            foil: FoilParams::default(),
            chopper: ChopperParams::default(),
            cavity: CavityParams::default(),
            sweep: SweepConfig::default(),
            model: SignalModel::Snxp,
            fit: FitSettings::default(),
            spectrum: SpectrumRange::default(),
        }
    }
}

impl RunConfig {
    /// The same configuration expressed in `to`.
    pub fn convert(&self, to: UnitMode) -> RunConfig {
        let (from, mut out) = (self.units, self.clone());
        let f = |t: f64| to.time_out(from.time_in(t));
        out.units = to;
        out.chopper.open_time = f(self.chopper.open_time);
        out.sweep.time_min = f(self.sweep.time_min);
        out.sweep.time_max = f(self.sweep.time_max);
        out.fit.gate_start = f(self.fit.gate_start);
        out.fit.delay_window = (f(self.fit.delay_window.0), f(self.fit.delay_window.1));
        out.fit.refine_halfwidth = f(self.fit.refine_halfwidth);
        out.spectrum.time_max = f(self.spectrum.time_max);
        out
    }

    /// Checks every parameter set after conversion to natural units.
    pub fn validate(&self) -> snxp::Result<()> {
        let n = self.convert(UnitMode::Natural);
        n.foil.validate()?;
        ChopperParams::new(n.chopper.open_time)?;
        n.cavity.validate()?;
        n.sweep.validate()?;
        n.fit.validate()?;
        let s = n.spectrum;
        if !(s.detuning_span > 0.0 && s.detuning_span.is_finite()) || s.n_points < 2 {
            return Err(snxp::Error::InvalidParameter {
                name: "spectrum",
                reason: "detuning span must be positive with at least two points".into(),
            });
        }
        if !(s.time_max > 0.0 && s.time_max.is_finite()) || s.n_time_points < 2 {
            return Err(snxp::Error::InvalidParameter {
                name: "spectrum",
                reason: "time range must be positive with at least two points".into(),
            });
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }
}
