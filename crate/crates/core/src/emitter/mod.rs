//! Resonantly driven two-level emitter.
//!
//! All rates are angular (rad/s): the radiative lifetime is `1 / decay_rate`.
//! Values quoted in ordinary frequency are available through the `*_hz`
//! helpers, which divide by 2π.

mod oracle;
mod sampler;
mod stream;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use oracle::{bloch_steady_state_population, oracle_bloch_g2};
pub use sampler::{sample_emissions, sample_emissions_partitioned, WaitingTimeTable};
pub use stream::TimeTagStream;

/// Drive and relaxation rates of the two-level system.
///
/// `decay_rate` is the population decay rate γ₂ and `dephasing_rate` the total
/// decay rate γ of the optical coherence. The combination
/// `rabi² − (dephasing − decay)²/4` sets the oscillation frequency of g²(τ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterParams {
    pub rabi_frequency: f64,
    pub decay_rate: f64,
    pub dephasing_rate: f64,
}

impl EmitterParams {
    pub fn new(rabi_frequency: f64, decay_rate: f64, dephasing_rate: f64) -> Result<Self> {
        let p = EmitterParams {
            rabi_frequency,
            decay_rate,
            dephasing_rate,
        };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from a radiative lifetime in seconds, with the Rabi
    /// frequency and dephasing rate given as multiples of the decay rate.
    pub fn from_lifetime(lifetime: f64, rabi_over_decay: f64, dephasing_over_decay: f64) -> Result<Self> {
        if !(lifetime.is_finite() && lifetime > 0.0) {
            return Err(Error::domain("lifetime", format!("must be positive, got {lifetime}")));
        }
        let decay = 1.0 / lifetime;
        Self::new(rabi_over_decay * decay, decay, dephasing_over_decay * decay)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rabi_frequency.is_finite() && self.rabi_frequency >= 0.0) {
            return Err(Error::domain(
                "rabi_frequency",
                format!("must be finite and >= 0, got {}", self.rabi_frequency),
            ));
        }
        if !(self.decay_rate.is_finite() && self.decay_rate > 0.0) {
            return Err(Error::domain(
                "decay_rate",
                format!("must be finite and > 0, got {}", self.decay_rate),
            ));
        }
        if !(self.dephasing_rate.is_finite() && self.dephasing_rate >= 0.0) {
            return Err(Error::domain(
                "dephasing_rate",
                format!("must be finite and >= 0, got {}", self.dephasing_rate),
            ));
        }
        Ok(())
    }

    /// μ² in (rad/s)²; negative in the overdamped regime.
    pub fn mu_squared(&self) -> f64 {
        let d = self.dephasing_rate - self.decay_rate;
        self.rabi_frequency * self.rabi_frequency - 0.25 * d * d
    }

    /// Envelope decay rate (γ + γ₂)/2 of g²(τ).
    pub fn envelope_rate(&self) -> f64 {
        0.5 * (self.dephasing_rate + self.decay_rate)
    }

    /// Radiative lifetime in seconds.
    pub fn lifetime(&self) -> f64 {
        1.0 / self.decay_rate
    }

    pub fn rabi_frequency_hz(&self) -> f64 {
        self.rabi_frequency / TAU
    }

    pub fn decay_rate_hz(&self) -> f64 {
        self.decay_rate / TAU
    }

    pub fn dephasing_rate_hz(&self) -> f64 {
        self.dephasing_rate / TAU
    }

    /// Rate left over for a pure-dephasing Lindblad channel once radiative
    /// decay has contributed γ₂/2 to the coherence decay. Negative values have
    /// no Lindblad representation.
    pub fn pure_dephasing_rate(&self) -> f64 {
        self.dephasing_rate - 0.5 * self.decay_rate
    }
}

#[derive(Debug, Clone, Copy)]
enum Regime {
    Under { mu: f64 },
    Critical,
    Over { m: f64 },
}

/// Precomputed closed form of g²(τ) for one parameter set.
#[derive(Debug, Clone, Copy)]
pub struct G2Curve {
    a: f64,
    regime: Regime,
    /// Beyond this delay |g² − 1| < 1e-17, so g² rounds to exactly 1.
    settle: f64,
}

impl G2Curve {
    pub fn new(params: &EmitterParams) -> Result<Self> {
        params.validate()?;
        Ok(Self::new_unchecked(params))
    }

    pub(crate) fn new_unchecked(params: &EmitterParams) -> Self {
        let a = params.envelope_rate();
        let mu2 = params.mu_squared();
        let regime = if mu2 > 0.0 {
            Regime::Under { mu: mu2.sqrt() }
        } else if mu2 < 0.0 {
            Regime::Over { m: (-mu2).sqrt() }
        } else {
            Regime::Critical
        };
        // |g² − 1| ≤ (1 + a·t)·e^{−r·t} in every regime, r the slowest rate
        let r = match regime {
            Regime::Over { m } => a - m,
            _ => a,
        };
        let settle = if r > 0.0 {
            let mut t = 40.0 / r;
            for _ in 0..8 {
                t = (40.0 + (1.0 + a * t).ln()) / r;
            }
            t
        } else {
            f64::INFINITY
        };
        G2Curve { a, regime, settle }
    }

    /// g²(τ) with τ in seconds.
    #[inline]
    pub fn eval(&self, tau: f64) -> f64 {
        let t = tau.abs();
        if t > self.settle {
            return 1.0;
        }
        let a = self.a;
        match self.regime {
            Regime::Under { mu } => {
                let (s, c) = (mu * t).sin_cos();
                1.0 - (c + a * s / mu) * (-a * t).exp()
            }
            Regime::Critical => 1.0 - (1.0 + a * t) * (-a * t).exp(),
            Regime::Over { m } => {
                // cosh/sinh folded into the envelope so large τ cannot overflow
                let slow = ((m - a) * t).exp();
                let fast = (-(m + a) * t).exp();
                let c = 0.5 * (slow + fast);
                let s = 0.5 * (slow - fast) / m;
                1.0 - (c + a * s)
            }
        }
    }
}

/// Normalized second-order correlation of the resonance fluorescence.
pub fn g2_analytic(params: &EmitterParams, tau: f64) -> Result<f64> {
    Ok(G2Curve::new(params)?.eval(tau))
}
