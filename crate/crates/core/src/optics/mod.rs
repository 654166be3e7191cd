//! Beam splitters, detectors and the Hong-Ou-Mandel interferometer.

mod detector;
mod hom;
mod sampler;

pub use detector::{apply_detector, split_stream, DetectorModel};
pub use hom::{
    hom_p2, hom_p2_orthogonal, hom_p2_parallel, hom_visibility, mode_overlap_with_ladders, HomConfig, HomCurve,
    Polarization,
};
pub use sampler::{simulate_hom_clicks, simulate_hom_clicks_with, HomSimOptions};

/// Interferometer arm delay used in the experiment, in ps.
pub const DEFAULT_ARM_DELAY_PS: f64 = 35_000.0;
