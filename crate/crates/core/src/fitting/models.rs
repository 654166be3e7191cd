//! Model families. Times are in ns, rates in rad/ns and frequencies in GHz.

use rayon::prelude::*;

use super::lm::Model;
use crate::emitter::{EmitterParams, G2Curve};
use crate::error::{Error, Result};
use crate::modulator::{bessel_j, lorentzian};
use crate::optics::{HomConfig, HomCurve, Polarization};
use crate::quadrature::{convolve_with, gaussian_kernel, CONVOLUTION_NODES};

const PAR_THRESHOLD: usize = 512;

fn fill<F: Fn(f64) -> f64 + Sync>(x: &[f64], out: &mut [f64], f: F) {
    if x.len() >= PAR_THRESHOLD {
        out.par_iter_mut().zip(x.par_iter()).for_each(|(o, &xi)| *o = f(xi));
    } else {
        for (o, &xi) in out.iter_mut().zip(x) {
            *o = f(xi);
        }
    }
}

fn emitter_ns(rabi: f64, dephasing: f64, decay: f64) -> Option<EmitterParams> {
    EmitterParams::new(rabi * 1e9, decay * 1e9, dephasing * 1e9).ok()
}

/// Parameters of the detected g² model in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct G2ModelParams {
    pub emitter: EmitterParams,
    pub amplitude: f64,
    pub baseline: f64,
    /// Per-detector timing jitter σ in seconds.
    pub jitter_sigma: f64,
}

/// amplitude·(g² ∗ N(0, 2σ²))(τ) + baseline at delay `tau` (s).
pub fn model_g2(params: &G2ModelParams, tau: f64) -> Result<f64> {
    if !(params.jitter_sigma.is_finite() && params.jitter_sigma >= 0.0) {
        return Err(Error::domain("jitter_sigma", format!("must be >= 0, got {}", params.jitter_sigma)));
    }
    let curve = G2Curve::new(&params.emitter)?;
    let kernel = gaussian_kernel(CONVOLUTION_NODES);
    let g = convolve_with(|t| curve.eval(t), tau, std::f64::consts::SQRT_2 * params.jitter_sigma, &kernel);
    Ok(params.amplitude * g + params.baseline)
}

/// Per-detector jitter σ (s) at which the detected g²(0) equals `target`.
///
/// The detected dip value rises monotonically with σ, so this bisects
/// between zero and a few lifetimes.
pub fn jitter_for_g2_zero(emitter: &EmitterParams, target: f64) -> Result<f64> {
    let curve = G2Curve::new(emitter)?;
    let kernel = gaussian_kernel(CONVOLUTION_NODES);
    let at = |sigma: f64| convolve_with(|t| curve.eval(t), 0.0, std::f64::consts::SQRT_2 * sigma, &kernel);
    let (mut lo, mut hi) = (0.0, 20.0 / emitter.envelope_rate());
    if !(target > at(lo) && target < at(hi)) {
        return Err(Error::domain(
            "target",
            format!("g2(0) = {target} is not reachable by jitter alone"),
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Detected g²(τ) with τ in ns.
///
/// Parameters: rabi, dephasing, decay (rad/ns), amplitude, baseline,
/// jitter (per-detector σ, ns).
#[derive(Debug, Clone, Copy, Default)]
pub struct G2Model;

impl G2Model {
    pub const RABI: usize = 0;
    pub const DEPHASING: usize = 1;
    pub const DECAY: usize = 2;
    pub const AMPLITUDE: usize = 3;
    pub const BASELINE: usize = 4;
    pub const JITTER: usize = 5;
}

impl Model for G2Model {
    fn param_names(&self) -> Vec<String> {
        ["rabi", "dephasing", "decay", "amplitude", "baseline", "jitter"]
            .map(String::from)
            .to_vec()
    }

    fn eval(&self, p: &[f64], x: &[f64], out: &mut [f64]) {
        let Some(emitter) = emitter_ns(p[0], p[1], p[2]) else {
            out.fill(f64::NAN);
            return;
        };
        let curve = G2Curve::new_unchecked(&emitter);
        let kernel = gaussian_kernel(CONVOLUTION_NODES);
        let width = std::f64::consts::SQRT_2 * p[5].max(0.0);
        let (amp, base) = (p[3], p[4]);
        fill(x, out, |t| amp * convolve_with(|s| curve.eval(s * 1e-9), t, width, &kernel) + base);
    }
}

/// amplitude·e^{−t/lifetime} + offset, t in ns.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpOffset;

impl Model for ExpOffset {
    fn param_names(&self) -> Vec<String> {
        ["amplitude", "lifetime", "offset"].map(String::from).to_vec()
    }

    fn eval(&self, p: &[f64], x: &[f64], out: &mut [f64]) {
        for (o, &t) in out.iter_mut().zip(x) {
            *o = p[0] * (-t / p[1]).exp() + p[2];
        }
    }
}

/// Starting values for [`ExpOffset`] from three points of the trace.
///
/// Uses the first, middle and last sample of equally spaced pairs
/// (t₀, t₀+Δ, t₀+2Δ): (y₀−y₁)/(y₁−y₂) = e^{Δ/T}.
pub fn exp_offset_initial_guess(t: &[f64], y: &[f64]) -> Result<[f64; 3]> {
    let n = t.len();
    if n < 3 || y.len() != n {
        return Err(Error::Validation("need at least three samples".into()));
    }
    let m = (n - 1) / 2;
    let (i0, i1, i2) = (0, m, 2 * m);
    let delta = t[i1] - t[i0];
    let ratio = (y[i0] - y[i1]) / (y[i1] - y[i2]);
    let lifetime = if ratio.is_finite() && ratio > 1.0 && delta > 0.0 {
        delta / ratio.ln()
    } else {
        (t[n - 1] - t[0]).max(f64::MIN_POSITIVE) / 3.0
    };
    let e0 = (-t[i0] / lifetime).exp();
    let e2 = (-t[i2] / lifetime).exp();
    let amplitude = if (e0 - e2).abs() > 0.0 {
        (y[i0] - y[i2]) / (e0 - e2)
    } else {
        y[i0] - y[i2]
    };
    let offset = y[i2] - amplitude * e2;
    Ok([amplitude, lifetime, offset])
}

/// Σₙ wₙ·L(x − center − n·spacing; width) for orders `min_order..=max_order`,
/// each L a unit-area Lorentzian of FWHM `width`. x in GHz.
///
/// Parameters: one weight per order, then spacing, width, center.
#[derive(Debug, Clone, Copy)]
pub struct LorentzianComb {
    pub min_order: i32,
    pub max_order: i32,
}

impl LorentzianComb {
    pub fn symmetric(max_order: u32) -> Self {
        LorentzianComb {
            min_order: -(max_order as i32),
            max_order: max_order as i32,
        }
    }

    pub fn n_orders(&self) -> usize {
        (self.max_order - self.min_order + 1) as usize
    }

    pub fn weight_index(&self, order: i32) -> usize {
        (order - self.min_order) as usize
    }

    pub fn spacing_index(&self) -> usize {
        self.n_orders()
    }

    pub fn width_index(&self) -> usize {
        self.n_orders() + 1
    }

    pub fn center_index(&self) -> usize {
        self.n_orders() + 2
    }
}

impl Model for LorentzianComb {
    fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (self.min_order..=self.max_order).map(|n| format!("weight_{n}")).collect();
        names.extend(["spacing", "width", "center"].map(String::from));
        names
    }

    fn eval(&self, p: &[f64], x: &[f64], out: &mut [f64]) {
        let k = self.n_orders();
        model_lorentzian_comb_into(self.min_order, &p[..k], p[k], p[k + 1], p[k + 2], x, out);
    }
}

fn model_lorentzian_comb_into(
    min_order: i32,
    weights: &[f64],
    spacing: f64,
    width: f64,
    center: f64,
    x: &[f64],
    out: &mut [f64],
) {
    for (o, &xi) in out.iter_mut().zip(x) {
        *o = weights
            .iter()
            .enumerate()
            .map(|(j, w)| w * lorentzian(xi - center - (min_order + j as i32) as f64 * spacing, width))
            .sum();
    }
}

/// Comb of Lorentzians with weights for orders −N..=N (N = (len−1)/2)
/// centred on zero.
pub fn model_lorentzian_comb(weights: &[f64], spacing: f64, width: f64, offsets: &[f64]) -> Result<Vec<f64>> {
    if weights.len().is_multiple_of(2) {
        return Err(Error::Validation("weights must cover orders -N..=N".into()));
    }
    if !(width > 0.0) {
        return Err(Error::domain("width", format!("must be > 0, got {width}")));
    }
    let n = (weights.len() / 2) as i32;
    let mut out = vec![0.0; offsets.len()];
    model_lorentzian_comb_into(-n, weights, spacing, width, 0.0, offsets, &mut out);
    Ok(out)
}

/// scale·Jₙ(k·x)², e.g. sideband power against drive amplitude.
#[derive(Debug, Clone, Copy)]
pub struct BesselIntensity {
    pub order: i32,
}

impl Model for BesselIntensity {
    fn param_names(&self) -> Vec<String> {
        ["scale", "index_per_unit"].map(String::from).to_vec()
    }

    fn eval(&self, p: &[f64], x: &[f64], out: &mut [f64]) {
        for (o, &xi) in out.iter_mut().zip(x) {
            let j = bessel_j(self.order, p[1] * xi);
            *o = p[0] * j * j;
        }
    }
}

/// Co- and cross-polarized HOM coincidence curves fitted together.
///
/// The abscissa is the concatenation of the parallel delays (first
/// `n_parallel` entries) and the orthogonal delays, all in ns. Parameters:
/// rabi, dephasing, decay (rad/ns), arm_delay (ns), jitter (per-detector σ,
/// ns), mode_overlap, coherence_time (ns), norm_parallel, norm_orthogonal.
///
/// With a nonzero `bin_width` (ns) each point is the average of the curve
/// over the bin centred on it (two-point Gauss-Legendre).
#[derive(Debug, Clone, Copy)]
pub struct HomPair {
    pub n_parallel: usize,
    pub bin_width: f64,
}

impl HomPair {
    pub const RABI: usize = 0;
    pub const DEPHASING: usize = 1;
    pub const DECAY: usize = 2;
    pub const ARM_DELAY: usize = 3;
    pub const JITTER: usize = 4;
    pub const MODE_OVERLAP: usize = 5;
    pub const COHERENCE_TIME: usize = 6;
    pub const NORM_PARALLEL: usize = 7;
    pub const NORM_ORTHOGONAL: usize = 8;

    /// Intrinsic (jitter-free) curves for a parameter vector.
    pub fn curve(p: &[f64]) -> Option<HomCurve> {
        let emitter = emitter_ns(p[0], p[1], p[2])?;
        let config = HomConfig {
            arm_delay: p[3] * 1e3,
            mode_overlap: p[5],
            coherence_time: p[6] * 1e-9,
            polarization: Polarization::Parallel,
        };
        HomCurve::new(&emitter, &config).ok()
    }
}

impl Model for HomPair {
    fn param_names(&self) -> Vec<String> {
        [
            "rabi",
            "dephasing",
            "decay",
            "arm_delay",
            "jitter",
            "mode_overlap",
            "coherence_time",
            "norm_parallel",
            "norm_orthogonal",
        ]
        .map(String::from)
        .to_vec()
    }

    fn eval(&self, p: &[f64], x: &[f64], out: &mut [f64]) {
        let Some(curve) = Self::curve(p) else {
            out.fill(f64::NAN);
            return;
        };
        let kernel = gaussian_kernel(CONVOLUTION_NODES);
        let width = std::f64::consts::SQRT_2 * p[4].max(0.0);
        let split = self.n_parallel.min(x.len());
        let (xp, xo) = x.split_at(split);
        let (op, oo) = out.split_at_mut(split);
        let (np, no) = (p[7], p[8]);
        let h = 0.5 * self.bin_width / 3f64.sqrt();
        let binned = |f: &dyn Fn(f64) -> f64, t: f64| {
            if h > 0.0 {
                0.5 * (f(t - h) + f(t + h))
            } else {
                f(t)
            }
        };
        let par = |t: f64| convolve_with(|s| curve.parallel(s * 1e-9), t, width, &kernel);
        let orth = |t: f64| convolve_with(|s| curve.orthogonal(s * 1e-9), t, width, &kernel);
        fill(xp, op, |t| np * binned(&par, t));
        fill(xo, oo, |t| no * binned(&orth, t));
    }
}
