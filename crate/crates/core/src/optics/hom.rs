//! Coincidence probabilities behind the unbalanced Mach-Zehnder.
//!
//! ```text
//! P∥(τ) = ½g²(τ) + ¼[g²(τ−Δτ) + g²(τ+Δτ)]·(1 − v_c·e^{−2|τ|/τ_c})
//! P⊥(τ) = ½g²(τ) + ¼[g²(τ−Δτ) + g²(τ+Δτ)]
//! V(τ)  = (P⊥ − P∥) / P⊥
//! ```

use serde::{Deserialize, Serialize};

use crate::emitter::{EmitterParams, G2Curve};
use crate::error::{Error, Result};
use crate::modulator::SidebandLadder;
use crate::quadrature::{convolve_with, gaussian_kernel, CONVOLUTION_NODES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    Parallel,
    Orthogonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomConfig {
    /// Δτ in ps.
    pub arm_delay: f64,
    /// v_c ∈ [0, 1].
    pub mode_overlap: f64,
    /// τ_c in seconds.
    pub coherence_time: f64,
    pub polarization: Polarization,
}

impl HomConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.arm_delay.is_finite() && self.arm_delay > 0.0) {
            return Err(Error::domain("arm_delay", format!("must be > 0 ps, got {}", self.arm_delay)));
        }
        if !(0.0..=1.0).contains(&self.mode_overlap) {
            return Err(Error::domain(
                "mode_overlap",
                format!("must lie in [0, 1], got {}", self.mode_overlap),
            ));
        }
        if !(self.coherence_time.is_finite() && self.coherence_time > 0.0) {
            return Err(Error::domain(
                "coherence_time",
                format!("must be > 0 s, got {}", self.coherence_time),
            ));
        }
        Ok(())
    }

    pub fn with_polarization(mut self, polarization: Polarization) -> Self {
        self.polarization = polarization;
        self
    }
}

/// Both coincidence curves for one emitter/interferometer pair, delays in
/// seconds.
#[derive(Debug, Clone, Copy)]
pub struct HomCurve {
    g2: G2Curve,
    delay: f64,
    overlap: f64,
    coherence_time: f64,
}

impl HomCurve {
    pub fn new(params: &EmitterParams, config: &HomConfig) -> Result<Self> {
        config.validate()?;
        Ok(HomCurve {
            g2: G2Curve::new(params)?,
            delay: config.arm_delay * 1e-12,
            overlap: config.mode_overlap,
            coherence_time: config.coherence_time,
        })
    }

    #[inline]
    pub fn orthogonal(&self, tau: f64) -> f64 {
        0.5 * self.g2.eval(tau) + 0.25 * (self.g2.eval(tau - self.delay) + self.g2.eval(tau + self.delay))
    }

    #[inline]
    pub fn parallel(&self, tau: f64) -> f64 {
        let side = 0.25 * (self.g2.eval(tau - self.delay) + self.g2.eval(tau + self.delay));
        let interference = 1.0 - self.overlap * (-2.0 * tau.abs() / self.coherence_time).exp();
        0.5 * self.g2.eval(tau) + side * interference
    }

    #[inline]
    pub fn value(&self, tau: f64, polarization: Polarization) -> f64 {
        match polarization {
            Polarization::Parallel => self.parallel(tau),
            Polarization::Orthogonal => self.orthogonal(tau),
        }
    }

    /// Curve seen through two detectors of Gaussian jitter `sigma` (s) each.
    pub fn convolved(&self, tau: f64, polarization: Polarization, sigma: f64) -> f64 {
        let kernel = gaussian_kernel(CONVOLUTION_NODES);
        convolve_with(|t| self.value(t, polarization), tau, std::f64::consts::SQRT_2 * sigma, &kernel)
    }

    pub fn g2(&self) -> &G2Curve {
        &self.g2
    }
}

fn require(config: &HomConfig, pol: Polarization) -> Result<()> {
    if config.polarization != pol {
        return Err(Error::Validation(format!(
            "configuration is {:?}, operation needs {pol:?}",
            config.polarization
        )));
    }
    Ok(())
}

/// Co-polarized coincidence probability at delay `tau` (s).
pub fn hom_p2_parallel(tau: f64, params: &EmitterParams, config: &HomConfig) -> Result<f64> {
    require(config, Polarization::Parallel)?;
    Ok(HomCurve::new(params, config)?.parallel(tau))
}

/// Cross-polarized coincidence probability at delay `tau` (s).
pub fn hom_p2_orthogonal(tau: f64, params: &EmitterParams, config: &HomConfig) -> Result<f64> {
    require(config, Polarization::Orthogonal)?;
    Ok(HomCurve::new(params, config)?.orthogonal(tau))
}

/// Coincidence probability for whichever polarization `config` names.
pub fn hom_p2(tau: f64, params: &EmitterParams, config: &HomConfig) -> Result<f64> {
    Ok(HomCurve::new(params, config)?.value(tau, config.polarization))
}

/// Two-photon interference visibility at delay `tau` (s); the polarization
/// field of `config` is ignored.
pub fn hom_visibility(tau: f64, params: &EmitterParams, config: &HomConfig) -> Result<f64> {
    let curve = HomCurve::new(params, config)?;
    let perp = curve.orthogonal(tau);
    if !(perp > 0.0) {
        return Err(Error::Numerical(format!(
            "cross-polarized coincidence probability is {perp} at τ = {tau} s"
        )));
    }
    Ok((perp - curve.parallel(tau)) / perp)
}

/// Mode overlap once each interfering photon carries a sideband ladder:
/// `v_c · |⟨a|b⟩|²`.
pub fn mode_overlap_with_ladders(mode_overlap: f64, a: &SidebandLadder, b: &SidebandLadder) -> Result<f64> {
    Ok(mode_overlap * a.overlap(b)?.norm_sqr())
}
