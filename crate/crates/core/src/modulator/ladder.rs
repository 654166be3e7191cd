use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bessel_j;
use crate::error::{Error, Result};

const MAX_ORDER: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulatorConfig {
    /// Peak phase excursion β.
    pub modulation_index: f64,
    /// Microwave drive frequency Ω/2π in Hz.
    pub drive_frequency: f64,
    /// Microwave phase θ in radians.
    #[serde(default)]
    pub drive_phase: f64,
}

impl ModulatorConfig {
    pub fn new(modulation_index: f64, drive_frequency: f64, drive_phase: f64) -> Result<Self> {
        let c = ModulatorConfig {
            modulation_index,
            drive_frequency,
            drive_phase,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.modulation_index.is_finite() && self.modulation_index >= 0.0) {
            return Err(Error::domain(
                "modulation_index",
                format!("must be finite and >= 0, got {}", self.modulation_index),
            ));
        }
        if !(self.drive_frequency.is_finite() && self.drive_frequency > 0.0) {
            return Err(Error::domain(
                "drive_frequency",
                format!("must be finite and > 0, got {}", self.drive_frequency),
            ));
        }
        if !self.drive_phase.is_finite() {
            return Err(Error::domain("drive_phase", "must be finite"));
        }
        Ok(())
    }
}

/// Complex amplitudes on the frequency modes ω₀ + nΩ.
#[derive(Debug, Clone, PartialEq)]
pub struct SidebandLadder {
    /// ω₀/2π in Hz.
    pub center_frequency: f64,
    /// Ω/2π in Hz.
    pub mode_spacing: f64,
    min_order: i32,
    amplitudes: Vec<Complex64>,
}

impl SidebandLadder {
    /// The unmodulated single-mode photon.
    pub fn carrier(center_frequency: f64, mode_spacing: f64) -> Self {
        SidebandLadder {
            center_frequency,
            mode_spacing,
            min_order: 0,
            amplitudes: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn from_amplitudes(
        center_frequency: f64,
        mode_spacing: f64,
        min_order: i32,
        amplitudes: Vec<Complex64>,
    ) -> Self {
        SidebandLadder {
            center_frequency,
            mode_spacing,
            min_order,
            amplitudes,
        }
    }

    pub fn min_order(&self) -> i32 {
        self.min_order
    }

    pub fn max_order(&self) -> i32 {
        self.min_order + self.amplitudes.len() as i32 - 1
    }

    pub fn orders(&self) -> std::ops::RangeInclusive<i32> {
        self.min_order..=self.max_order()
    }

    /// Amplitude of mode `n`; zero outside the stored range.
    pub fn amplitude(&self, n: i32) -> Complex64 {
        let i = n - self.min_order;
        if i < 0 {
            return Complex64::new(0.0, 0.0);
        }
        self.amplitudes
            .get(i as usize)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn intensity(&self, n: i32) -> f64 {
        self.amplitude(n).norm_sqr()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Σ|aₙ|².
    pub fn total_power(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Absolute frequency of mode `n` in Hz.
    pub fn mode_frequency(&self, n: i32) -> f64 {
        self.center_frequency + n as f64 * self.mode_spacing
    }

    /// ⟨self|other⟩ = Σ conj(aₙ)·bₙ.
    pub fn overlap(&self, other: &SidebandLadder) -> Result<Complex64> {
        self.check_compatible(other)?;
        Ok(self
            .orders()
            .map(|n| self.amplitude(n).conj() * other.amplitude(n))
            .sum())
    }

    /// Ladder after passing through a second modulator with the same drive
    /// frequency: discrete convolution of the amplitude sequences.
    pub fn compose(&self, other: &SidebandLadder) -> Result<SidebandLadder> {
        self.check_compatible(other)?;
        let len = self.amplitudes.len() + other.amplitudes.len() - 1;
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        for (i, a) in self.amplitudes.iter().enumerate() {
            for (j, b) in other.amplitudes.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Ok(SidebandLadder {
            center_frequency: self.center_frequency,
            mode_spacing: self.mode_spacing,
            min_order: self.min_order + other.min_order,
            amplitudes: out,
        })
    }

    fn check_compatible(&self, other: &SidebandLadder) -> Result<()> {
        let tol = 1e-9 * self.mode_spacing.abs().max(other.mode_spacing.abs());
        if (self.mode_spacing - other.mode_spacing).abs() > tol {
            return Err(Error::Validation(format!(
                "mode spacing mismatch: {} Hz vs {} Hz",
                self.mode_spacing, other.mode_spacing
            )));
        }
        Ok(())
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1e-3) {
        return Err(Error::domain("epsilon", format!("must lie in (0, 1e-3], got {epsilon}")));
    }
    Ok(())
}

/// Smallest N with Σ_{|n|≤N} Jₙ(β)² ≥ 1 − ε.
pub fn truncation_order(beta: f64, epsilon: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::domain("modulation_index", format!("must be >= 0, got {beta}")));
    }
    let target = 1.0 - epsilon;
    let mut sum = bessel_j(0, beta).powi(2);
    let mut n = 0;
    while sum < target && n < MAX_ORDER {
        n += 1;
        let j = bessel_j(n as i32, beta);
        sum += 2.0 * j * j;
        // past the turning point the series is exhausted in double precision
        if n as f64 > beta && j * j < 1e-300 {
            break;
        }
    }
    Ok(n)
}

/// Output ladder of the modulator for a photon at `center` Hz, truncated so
/// that the retained power is at least 1 − `epsilon`.
pub fn sideband_amplitudes(config: &ModulatorConfig, center: f64, epsilon: f64) -> Result<SidebandLadder> {
    config.validate()?;
    let n_max = truncation_order(config.modulation_index, epsilon)?;
    sideband_amplitudes_to_order(config, center, n_max)
}

/// Output ladder keeping the modes |n| ≤ `n_max`.
pub fn sideband_amplitudes_to_order(config: &ModulatorConfig, center: f64, n_max: usize) -> Result<SidebandLadder> {
    config.validate()?;
    if n_max > MAX_ORDER {
        return Err(Error::domain("n_max", format!("must be <= {MAX_ORDER}, got {n_max}")));
    }
    let beta = config.modulation_index;
    let n_max = n_max as i32;
    let phase = config.drive_phase - FRAC_PI_2;
    let amplitudes = (-n_max..=n_max)
        .map(|n| Complex64::from_polar(1.0, phase * n as f64) * bessel_j(n, beta))
        .collect();
    Ok(SidebandLadder {
        center_frequency: center,
        mode_spacing: config.drive_frequency,
        min_order: -n_max,
        amplitudes,
    })
}

/// First positive zero of J₀: the modulation index that empties the carrier.
pub fn carrier_null_index() -> f64 {
    let (mut lo, mut hi) = (2.0f64, 3.0f64);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if bessel_j(0, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
