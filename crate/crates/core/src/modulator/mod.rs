//! Sinusoidal electro-optic phase modulation of a single-photon mode.
//!
//! A photon at ω₀ leaves the modulator in the superposition
//! Σₙ Jₙ(β)·e^{i(θ−π/2)n} |ω₀ + nΩ⟩.

mod bessel;
mod ladder;
mod spectrum;

pub use bessel::bessel_j;
pub use ladder::{carrier_null_index, sideband_amplitudes, sideband_amplitudes_to_order, truncation_order, ModulatorConfig, SidebandLadder};
pub(crate) use spectrum::csv_err;
pub use spectrum::{linear_grid, lorentzian, spectrum_trace, SpectrumTrace};

/// Truncation tolerance used when none is given.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Default scanning-etalon transmission FWHM in Hz.
pub const DEFAULT_ETALON_LINEWIDTH: f64 = 100e6;
