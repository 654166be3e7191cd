//! Simulation and analysis of single-photon streams from a resonantly driven
//! two-level emitter.
//!
//! The crate is split along the experimental pipeline:
//!
//! * [`emitter`] – analytic g²(τ), an optical-Bloch reference integrator and a
//!   quantum-jump photon sampler producing [`TimeTagStream`]s.
//! * [`modulator`] – Bessel sideband ladders produced by an electro-optic phase
//!   modulator and the scanning-etalon spectra they produce.
//! * [`optics`] – beam splitter, detector imperfections and the Hong-Ou-Mandel
//!   coincidence models.
//! * [`correlator`] – multi-stop cross-correlation of time-tag streams, g²
//!   normalization and the on-disk tag/histogram formats.
//! * [`fitting`] – a damped least-squares engine and the model families used to
//!   analyse the simulated data.
//!
//! Units: analytic functions take delays in seconds and rates in rad/s; time
//! tags are integer picoseconds; the fitting models work in nanoseconds and
//! rad/ns (GHz) so that parameters are of order one.

pub mod correlator;
pub mod emitter;
mod error;
pub mod fitting;
pub mod modulator;
pub mod optics;
mod quadrature;

pub(crate) mod rng;

pub use rng::derive_seed;

pub use correlator::CorrelationHistogram;
pub use emitter::{EmitterParams, TimeTagStream};
pub use error::{Error, Result};
pub use fitting::{FitProblem, FitResult};
pub use modulator::{ModulatorConfig, SidebandLadder, SpectrumTrace};
pub use optics::{DetectorModel, HomConfig, Polarization};
