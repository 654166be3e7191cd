//! Event-level HOM sampler: detector-pair delays drawn by rejection from the
//! analytic coincidence curve, then smeared by the jitter of both detectors.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::hom::{mode_overlap_with_ladders, HomConfig, HomCurve};
use super::DetectorModel;
use crate::correlator::{CorrelationHistogram, HistogramMeta, DEFAULT_BIN_PS};
use crate::emitter::EmitterParams;
use crate::error::{Error, Result};
use crate::modulator::SidebandLadder;
use crate::rng::seeded;

const MIN_ACCEPTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomSimOptions {
    pub bin_width: u64,
    /// Sampling window as a multiple of the arm delay.
    pub window_factor: f64,
}

impl Default for HomSimOptions {
    fn default() -> Self {
        HomSimOptions {
            bin_width: DEFAULT_BIN_PS,
            window_factor: 3.0,
        }
    }
}

/// Histogram of `target_pairs` simulated coincidences over ±3Δτ.
pub fn simulate_hom_clicks(
    params: &EmitterParams,
    config: &HomConfig,
    detector: &DetectorModel,
    target_pairs: u64,
    seed: u64,
) -> Result<CorrelationHistogram> {
    simulate_hom_clicks_with(params, config, detector, None, target_pairs, seed, HomSimOptions::default())
}

/// As [`simulate_hom_clicks`], optionally with both interfering photons
/// carrying `ladder`, which scales the mode overlap by |⟨ladder|ladder⟩|².
pub fn simulate_hom_clicks_with(
    params: &EmitterParams,
    config: &HomConfig,
    detector: &DetectorModel,
    ladder: Option<&SidebandLadder>,
    target_pairs: u64,
    seed: u64,
    opts: HomSimOptions,
) -> Result<CorrelationHistogram> {
    if target_pairs == 0 {
        return Err(Error::domain("target_pairs", "must be > 0"));
    }
    detector.validate()?;
    let mut effective = *config;
    if let Some(l) = ladder {
        effective.mode_overlap = mode_overlap_with_ladders(config.mode_overlap, l, l)?.min(1.0);
    }
    let curve = HomCurve::new(params, &effective)?;
    let pol = effective.polarization;

    let half_window_ps = (opts.window_factor * effective.arm_delay).ceil();
    let half_window = half_window_ps * 1e-12;
    let mut hist = CorrelationHistogram::new(opts.bin_width, half_window_ps as u64)?;

    // P(τ) ≤ max g², located on a grid fine against every rate in g²
    let g2 = curve.g2();
    let fastest = params.envelope_rate().max(params.mu_squared().abs().sqrt());
    let step = 1.0 / (200.0 * fastest);
    let horizon = (60.0 / params.envelope_rate().min(fastest)).min(half_window + effective.arm_delay);
    let n = ((horizon / step) as usize).clamp(1000, 2_000_000);
    let peak = (0..=n)
        .map(|i| g2.eval(horizon * i as f64 / n as f64))
        .fold(1.0f64, f64::max);
    let bound = peak * 1.01;

    // mean acceptance from a coarse quadrature of P over the window
    let probe = 20_000;
    let mean_p = (0..probe)
        .map(|i| curve.value(-half_window + 2.0 * half_window * (i as f64 + 0.5) / probe as f64, pol))
        .sum::<f64>()
        / probe as f64;
    if mean_p / bound < MIN_ACCEPTANCE {
        return Err(Error::Numerical(format!(
            "rejection acceptance {:.3e} below {MIN_ACCEPTANCE:e}",
            mean_p / bound
        )));
    }

    let mut rng = seeded(seed);
    let jitter = if detector.jitter_sigma > 0.0 {
        Some(
            Normal::new(0.0, std::f64::consts::SQRT_2 * detector.jitter_sigma)
                .map_err(|e| Error::domain("jitter_sigma", e.to_string()))?,
        )
    } else {
        None
    };
    let mut accepted = 0u64;
    while accepted < target_pairs {
        let tau = rng.random_range(-half_window..half_window);
        if rng.random::<f64>() * bound >= curve.value(tau, pol) {
            continue;
        }
        accepted += 1;
        let mut tau_ps = tau * 1e12;
        if let Some(j) = &jitter {
            tau_ps += j.sample(&mut rng);
        }
        if let Some(k) = hist.index_of_f64(tau_ps) {
            hist.counts_mut()[k] += 1;
        }
    }
    hist.meta = HistogramMeta {
        count_a: target_pairs,
        count_b: target_pairs,
        duration: 0,
    };
    Ok(hist)
}
