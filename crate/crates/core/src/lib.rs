//! Simulation and analysis of spectrally narrow x-ray pulses (SNXP) reflected
//! off a resonant thin-film cavity.
//!
//! The pipeline mirrors a nuclear-resonance experiment at desk scale:
//!
//! * [`foil`]: transmission of a Doppler-driven ⁵⁷Fe foil and the chopper-gated
//!   pulse, in frequency and time.
//! * [`cavity`]: complex reflection of the cavity in Faraday geometry, group
//!   delay, the two-pole form of each branch and the susceptibility mapping.
//! * [`response`]: time-resolved detector signal, both numerically (FFT) and
//!   through closed forms for the prompt and delayed parts.
//! * [`synth`]: Poisson photon-count matrices over time and Doppler detuning.
//! * [`fit`]: global cavity fit on per-time-step normalized data followed by
//!   multi-start per-detuning delay extraction.
//!
//! All quantities use natural units: frequencies in multiples of the nuclear
//! linewidth γ and times in multiples of 1/γ. [`units::Units`] converts to
//! ns and neV.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod error;
pub mod exec;
pub mod fit;
pub mod foil;
pub mod format;
pub mod grid;
pub mod phase;
pub mod response;
pub mod special;
pub mod synth;
pub mod transform;
pub mod units;

pub use error::{Error, Result};
pub use exec::Exec;
pub use grid::{FrequencyGrid, TimeGrid};
pub use num_complex::Complex64;
pub use transform::{ComplexSpectrum, TimeTrace};
