//! Command-line flags. Every flag is optional and overrides the run
//! configuration; defaults are the reference foil and the fitted cavity.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use snxp::fit::DelayObjective;
use snxp::synth::SignalModel;

use crate::config::{RunConfig, UnitMode};

#[derive(Debug, Parser)]
#[command(name = "snxp", version, about = "Spectrally narrow x-ray pulses: spectra, cavity delays, synthetic data and fits")]
pub struct Cli {
    /// Unit system of time-valued flags and outputs: natural (1/γ) or physical (ns).
    /// Frequencies are always multiples of γ [default: natural]
    #[arg(long, value_enum, global = true)]
    pub units: Option<UnitMode>,
    /// TOML run configuration to start from; flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Evaluate sweeps on the calling thread only
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Foil and chopper-gated pulse in frequency and time (spectrum.csv, time.csv)
    Spectrum(SpectrumCmd),
    /// Group delay of the cavity over a detuning sweep (delay.csv)
    Delay(DelayCmd),
    /// Poisson count matrix over time and detuning, with the truth block
    Synth(SynthCmd),
    /// Global cavity fit and per-detuning delays of a count matrix
    Fit(FitCmd),
}

#[derive(Debug, Args)]
pub struct SpectrumCmd {
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[command(flatten)]
    pub foil: FoilArgs,
    /// Chopper opening time [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub chopper_open: Option<f64>,
    /// Half-width of the detuning axis around the Doppler detuning, in γ [default: 100]
    #[arg(long, allow_negative_numbers = true)]
    pub span: Option<f64>,
    /// Number of detuning samples [default: 2001]
    #[arg(long)]
    pub points: Option<usize>,
    /// End of the time axis [default: 2/γ]
    #[arg(long, allow_negative_numbers = true)]
    pub time_max: Option<f64>,
    /// Number of time samples [default: 1001]
    #[arg(long)]
    pub time_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct DelayCmd {
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    #[command(flatten)]
    pub cavity: CavityArgs,
    #[command(flatten)]
    pub detunings: DetuningArgs,
}

#[derive(Debug, Args)]
pub struct SynthCmd {
    /// Output count-matrix file
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    #[command(flatten)]
    pub foil: FoilArgs,
    #[command(flatten)]
    pub cavity: CavityArgs,
    #[command(flatten)]
    pub detunings: DetuningArgs,
    #[command(flatten)]
    pub times: TimeArgs,
    /// Expected total counts [default: 1e6]
    #[arg(long, allow_negative_numbers = true)]
    pub counts: Option<f64>,
    /// Seed of the Poisson draw [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Signal the counts are drawn from [default: snxp]
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
}

#[derive(Debug, Args)]
pub struct FitCmd {
    /// Count-matrix file to fit
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Initial effective thickness L [default: 126.3]
    #[arg(long, allow_negative_numbers = true)]
    pub thickness: Option<f64>,
    #[command(flatten)]
    pub cavity: CavityArgs,
    /// Bins starting before this time are ignored [default: 50 ns]
    #[arg(long, allow_negative_numbers = true)]
    pub gate: Option<f64>,
    /// Accepted delay range, lower end [default: −0.1/γ]
    #[arg(long, allow_negative_numbers = true)]
    pub delay_min: Option<f64>,
    /// Accepted delay range, upper end [default: 0.4/γ]
    #[arg(long, allow_negative_numbers = true)]
    pub delay_max: Option<f64>,
    /// Starts per stage of the delay fit [default: 50]
    #[arg(long)]
    pub starts: Option<usize>,
    /// Signal model of the global fit [default: full]
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    /// Let the global fit vary κ (singular: only g2N/(κ + iΔ_C) is identifiable)
    #[arg(long)]
    pub free_kappa: bool,
    /// Per-bin objective of the delay fits [default: deviance]
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveArg>,
    /// Keep delay fits within this many units of the best objective; a negative
    /// value keeps every fit inside the window [default: 0.1]
    #[arg(long, allow_negative_numbers = true)]
    pub keep_margin: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FoilArgs {
    /// Effective thickness L of the foil [default: 126.3]
    #[arg(long, allow_negative_numbers = true)]
    pub thickness: Option<f64>,
    /// Doppler detuning of the foil, in γ [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub doppler: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CavityArgs {
    /// Cavity decay rate κ, in γ [default: 45]
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Collective coupling |g|²N, in γ² [default: 3285]
    #[arg(long, allow_negative_numbers = true)]
    pub g2n: Option<f64>,
    /// Cavity detuning Δ_C, in γ [default: −28.1]
    #[arg(long, allow_negative_numbers = true)]
    pub delta_c: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DetuningArgs {
    /// First Doppler detuning of the sweep, in γ [default: −60]
    #[arg(long, allow_negative_numbers = true)]
    pub detuning_min: Option<f64>,
    /// Last Doppler detuning of the sweep, in γ [default: 60]
    #[arg(long, allow_negative_numbers = true)]
    pub detuning_max: Option<f64>,
    /// Number of detunings [default: 121]
    #[arg(long)]
    pub n_detunings: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    /// Start of the first time bin [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    pub time_min: Option<f64>,
    /// End of the last time bin [default: 200 ns]
    #[arg(long, allow_negative_numbers = true)]
    pub time_max: Option<f64>,
    /// Number of time bins [default: 200]
    #[arg(long)]
    pub n_bins: Option<usize>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum ModelArg {
    Full,
    Snxp,
}

impl From<ModelArg> for SignalModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Full => SignalModel::Full,
            ModelArg::Snxp => SignalModel::Snxp,
        }
    }
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum ObjectiveArg {
    Deviance,
    Neyman,
}

impl From<ObjectiveArg> for DelayObjective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Deviance => DelayObjective::PoissonDeviance,
            ObjectiveArg::Neyman => DelayObjective::Neyman,
        }
    }
}

fn set<T: Copy>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}

impl FoilArgs {
    pub fn apply(&self, c: &mut RunConfig) {
        set(&mut c.foil.effective_thickness, self.thickness);
        set(&mut c.foil.doppler_detuning, self.doppler);
    }
}

impl CavityArgs {
    pub fn apply(&self, c: &mut RunConfig) {
        if let Some(k) = self.kappa {
            c.cavity.kappa = k;
            c.cavity.kappa_r = k / 2.0;
        }
        set(&mut c.cavity.g2n, self.g2n);
        set(&mut c.cavity.delta_c, self.delta_c);
    }
}

impl DetuningArgs {
    pub fn apply(&self, c: &mut RunConfig) {
        set(&mut c.sweep.detuning_min, self.detuning_min);
        set(&mut c.sweep.detuning_max, self.detuning_max);
        set(&mut c.sweep.n_detunings, self.n_detunings);
    }
}

impl TimeArgs {
    pub fn apply(&self, c: &mut RunConfig) {
        set(&mut c.sweep.time_min, self.time_min);
        set(&mut c.sweep.time_max, self.time_max);
        set(&mut c.sweep.n_time_bins, self.n_bins);
    }
}

impl SpectrumCmd {
    pub fn apply(&self, c: &mut RunConfig) {
        self.foil.apply(c);
        set(&mut c.chopper.open_time, self.chopper_open);
        set(&mut c.spectrum.detuning_span, self.span);
        set(&mut c.spectrum.n_points, self.points);
        set(&mut c.spectrum.time_max, self.time_max);
        set(&mut c.spectrum.n_time_points, self.time_points);
    }
}

impl DelayCmd {
    pub fn apply(&self, c: &mut RunConfig) {
        self.cavity.apply(c);
        self.detunings.apply(c);
    }
}

impl SynthCmd {
    pub fn apply(&self, c: &mut RunConfig) {
        self.foil.apply(c);
        self.cavity.apply(c);
        self.detunings.apply(c);
        self.times.apply(c);
        set(&mut c.sweep.total_expected_counts, self.counts);
        set(&mut c.sweep.rng_seed, self.seed);
        set(&mut c.model, self.model.map(Into::into));
    }
}

impl FitCmd {
    pub fn apply(&self, c: &mut RunConfig) {
        set(&mut c.foil.effective_thickness, self.thickness);
        self.cavity.apply(c);
        set(&mut c.fit.gate_start, self.gate);
        set(&mut c.fit.delay_window.0, self.delay_min);
        set(&mut c.fit.delay_window.1, self.delay_max);
        if let Some(n) = self.starts {
            c.fit.n_starts_stage1 = n;
            c.fit.n_starts_stage2 = n;
        }
        set(&mut c.fit.model, self.model.map(Into::into));
        c.fit.free_kappa |= self.free_kappa;
        set(&mut c.fit.delay_objective, self.objective.map(Into::into));
        if let Some(m) = self.keep_margin {
            c.fit.keep_margin = if m < 0.0 { None } else { Some(m) };
        }
    }
}
