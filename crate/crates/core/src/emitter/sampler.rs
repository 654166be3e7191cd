//! Quantum-jump photon sampler.
//!
//! Every detected emission projects the emitter onto its ground state, so
//! emissions form a renewal process. Between jumps the emitter follows the
//! no-emission (conditional) evolution
//!
//! ```text
//! ρee' = −γ₂ ρee − Ω y
//! ρgg' = Ω y
//! y'   = −(Ω/2)(ρgg − ρee) − γ y
//! ```
//!
//! whose trace `S(t) = ρee + ρgg` is the probability that no photon has been
//! emitted yet. The norm-resolved jump rule (draw `r`, jump when `S` falls to
//! `r`) is applied to a fixed-step RK4 tabulation of `S`, computed once per
//! parameter set and shared by every trajectory.

use rand::Rng;
use rayon::prelude::*;

use super::oracle::bloch_step;
use super::{EmitterParams, TimeTagStream};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded};

const SURVIVAL_FLOOR: f64 = 1e-13;
const MAX_TABLE_LEN: usize = 1 << 22;

/// Tabulated no-emission probability S(t) on a uniform grid, with an
/// exponential tail beyond the last entry.
#[derive(Debug, Clone)]
pub struct WaitingTimeTable {
    step: f64,
    survival: Vec<f64>,
    tail_rate: f64,
    never_emits: bool,
}

impl WaitingTimeTable {
    pub fn new(params: &EmitterParams) -> Result<Self> {
        params.validate()?;
        if params.pure_dephasing_rate() < 0.0 {
            return Err(Error::domain(
                "dephasing_rate",
                format!(
                    "coherence decay {} rad/s is below decay_rate/2 = {} rad/s; \
                     no quantum-jump unravelling exists",
                    params.dephasing_rate,
                    0.5 * params.decay_rate
                ),
            ));
        }
        if params.rabi_frequency == 0.0 {
            return Ok(WaitingTimeTable {
                step: 1.0,
                survival: vec![1.0],
                tail_rate: 0.0,
                never_emits: true,
            });
        }

        let rabi = params.rabi_frequency;
        let decay = params.decay_rate;
        let deph = params.dephasing_rate;
        let deriv = |s: &[f64; 3]| -> [f64; 3] {
            let [p, q, y] = *s;
            [-decay * p - rabi * y, rabi * y, -0.5 * rabi * (q - p) - deph * y]
        };
        let h = bloch_step(params);
        let mut s = [0.0, 1.0, 0.0];
        let mut survival = Vec::with_capacity(4096);
        survival.push(1.0);
        loop {
            let k1 = deriv(&s);
            let k2 = deriv(&std::array::from_fn(|i| s[i] + 0.5 * h * k1[i]));
            let k3 = deriv(&std::array::from_fn(|i| s[i] + 0.5 * h * k2[i]));
            let k4 = deriv(&std::array::from_fn(|i| s[i] + h * k3[i]));
            for i in 0..3 {
                s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            let prev = *survival.last().unwrap();
            // clamp tiny round-off so the table stays monotone for bisection
            let next = (s[0] + s[1]).min(prev);
            survival.push(next);
            if next < SURVIVAL_FLOOR || survival.len() >= MAX_TABLE_LEN {
                break;
            }
        }
        let s_end = *survival.last().unwrap();
        let tail_rate = (decay * s[0].max(0.0) / s_end.max(f64::MIN_POSITIVE)).max(1e-300);
        Ok(WaitingTimeTable {
            step: h,
            survival,
            tail_rate,
            never_emits: false,
        })
    }

    /// Probability of no emission within `t` seconds of the previous one.
    pub fn survival(&self, t: f64) -> f64 {
        if self.never_emits {
            return 1.0;
        }
        let x = t / self.step;
        let i = x.floor() as usize;
        if i + 1 < self.survival.len() {
            let f = x - i as f64;
            self.survival[i] * (1.0 - f) + self.survival[i + 1] * f
        } else {
            let t_end = (self.survival.len() - 1) as f64 * self.step;
            self.survival.last().unwrap() * (-(t - t_end) * self.tail_rate).exp()
        }
    }

    /// Waiting time (seconds) for which the survival equals `r` ∈ (0, 1].
    pub fn invert(&self, r: f64) -> f64 {
        if self.never_emits {
            return f64::INFINITY;
        }
        let idx = self.survival.partition_point(|&s| s > r);
        if idx == 0 {
            return 0.0;
        }
        if idx < self.survival.len() {
            let (hi, lo) = (self.survival[idx - 1], self.survival[idx]);
            let f = if hi > lo { (hi - r) / (hi - lo) } else { 0.0 };
            return ((idx - 1) as f64 + f) * self.step;
        }
        let t_end = (self.survival.len() - 1) as f64 * self.step;
        t_end + (self.survival.last().unwrap() / r).ln() / self.tail_rate
    }

    /// One trajectory of `duration` picoseconds, starting right after an
    /// emission at t = 0.
    pub fn sample_stream(&self, duration: u64, seed: u64, channel: u8) -> TimeTagStream {
        let mut rng = seeded(seed);
        let mut out = Vec::new();
        if self.never_emits || duration == 0 {
            return TimeTagStream::empty(channel, duration);
        }
        let end = duration as f64;
        let mut clock_ps = 0.0f64;
        let mut last: Option<u64> = None;
        loop {
            // 1 - U[0,1) lies in (0, 1]
            let r = 1.0 - rng.random::<f64>();
            clock_ps += self.invert(r) * 1e12;
            if clock_ps > end {
                break;
            }
            let mut tag = clock_ps.round() as u64;
            if let Some(prev) = last {
                if tag <= prev {
                    tag = prev + 1;
                }
            }
            if tag > duration {
                break;
            }
            out.push(tag);
            last = Some(tag);
        }
        TimeTagStream::from_sorted_unchecked(channel, out, duration)
    }
}

/// Emission times of the driven emitter over `duration` picoseconds.
pub fn sample_emissions(params: &EmitterParams, duration: u64, seed: u64) -> Result<TimeTagStream> {
    if duration == 0 {
        params.validate()?;
        return Ok(TimeTagStream::empty(0, 0));
    }
    Ok(WaitingTimeTable::new(params)?.sample_stream(duration, seed, 0))
}

/// Same process generated as `segments` independent trajectories with derived
/// seeds, run in parallel and laid end to end.
///
/// Each segment restarts from the ground state, which perturbs correlations
/// only within one correlation window of a boundary.
pub fn sample_emissions_partitioned(
    params: &EmitterParams,
    duration: u64,
    seed: u64,
    segments: usize,
) -> Result<TimeTagStream> {
    let table = WaitingTimeTable::new(params)?;
    let segments = segments.max(1) as u64;
    let seg_len = duration.div_ceil(segments);
    let pieces: Vec<(u64, TimeTagStream)> = (0..segments)
        .into_par_iter()
        .filter_map(|k| {
            let start = k * seg_len;
            if start >= duration {
                return None;
            }
            let len = seg_len.min(duration - start);
            Some((start, table.sample_stream(len, derive_seed(seed, k), 0)))
        })
        .collect();
    let mut tags = Vec::new();
    for (start, piece) in pieces {
        for t in piece.timestamps() {
            let abs = start + t;
            if tags.last().is_none_or(|&prev| abs > prev) {
                tags.push(abs);
            }
        }
    }
    Ok(TimeTagStream::from_sorted_unchecked(0, tags, duration))
}
