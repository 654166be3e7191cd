use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::emitter::TimeTagStream;
use crate::error::{Error, Result};
use crate::rng::seeded;

/// Single-photon detector imperfections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    /// Gaussian timing spread σ in ps.
    pub jitter_sigma: f64,
    /// Minimum spacing between registered clicks in ps.
    pub dead_time: u64,
    /// Detection probability per incident photon.
    pub efficiency: f64,
    /// Dark counts per second.
    pub dark_rate: f64,
}

impl DetectorModel {
    pub fn ideal() -> Self {
        DetectorModel {
            jitter_sigma: 0.0,
            dead_time: 0,
            efficiency: 1.0,
            dark_rate: 0.0,
        }
    }

    pub fn with_jitter(jitter_sigma: f64) -> Self {
        DetectorModel {
            jitter_sigma,
            ..Self::ideal()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.jitter_sigma.is_finite() && self.jitter_sigma >= 0.0) {
            return Err(Error::domain("jitter_sigma", format!("must be >= 0, got {}", self.jitter_sigma)));
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::domain("efficiency", format!("must lie in [0, 1], got {}", self.efficiency)));
        }
        if !(self.dark_rate.is_finite() && self.dark_rate >= 0.0) {
            return Err(Error::domain("dark_rate", format!("must be >= 0, got {}", self.dark_rate)));
        }
        Ok(())
    }
}

/// Passes a stream through one detector.
///
/// Per tag: loss with probability `1 − efficiency`, then Gaussian jitter
/// (clamped to the acquisition window). Dark counts are superposed uniformly
/// in time, and the merged clicks are filtered for dead time; coincident
/// clicks on the same picosecond register once.
pub fn apply_detector(stream: &TimeTagStream, model: &DetectorModel, seed: u64) -> Result<TimeTagStream> {
    model.validate()?;
    let mut rng = seeded(seed);
    let duration = stream.duration();
    let jitter = if model.jitter_sigma > 0.0 {
        Some(Normal::new(0.0, model.jitter_sigma).map_err(|e| Error::domain("jitter_sigma", e.to_string()))?)
    } else {
        None
    };

    let mut clicks: Vec<u64> = Vec::with_capacity(stream.len());
    for &t in stream.timestamps() {
        if model.efficiency < 1.0 && rng.random::<f64>() >= model.efficiency {
            continue;
        }
        let t = match &jitter {
            Some(n) => (t as f64 + n.sample(&mut rng)).round().clamp(0.0, duration as f64) as u64,
            None => t,
        };
        clicks.push(t);
    }

    let expected_dark = model.dark_rate * duration as f64 * 1e-12;
    if expected_dark > 0.0 {
        let n = Poisson::new(expected_dark)
            .map_err(|e| Error::domain("dark_rate", e.to_string()))?
            .sample(&mut rng) as u64;
        clicks.extend((0..n).map(|_| rng.random_range(0..=duration)));
    }

    clicks.sort_unstable();
    let dead = model.dead_time.max(1);
    let mut out = Vec::with_capacity(clicks.len());
    for t in clicks {
        match out.last() {
            Some(&prev) if t - prev < dead => {}
            _ => out.push(t),
        }
    }
    Ok(TimeTagStream::from_sorted_unchecked(stream.channel(), out, duration))
}

/// 50:50 beam splitter: each tag goes to output A (channel 0) or B
/// (channel 1) with equal probability.
pub fn split_stream(stream: &TimeTagStream, seed: u64) -> (TimeTagStream, TimeTagStream) {
    let mut rng = seeded(seed);
    let mut a = Vec::with_capacity(stream.len() / 2 + 1);
    let mut b = Vec::with_capacity(stream.len() / 2 + 1);
    for &t in stream.timestamps() {
        if rng.random::<bool>() {
            a.push(t);
        } else {
            b.push(t);
        }
    }
    let d = stream.duration();
    (
        TimeTagStream::from_sorted_unchecked(0, a, d),
        TimeTagStream::from_sorted_unchecked(1, b, d),
    )
}
