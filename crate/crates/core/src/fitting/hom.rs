//! Joint fit of co- and cross-polarized HOM histograms.

use super::lm::{least_squares, FitProblem, FitResult};
use super::models::HomPair;
use crate::correlator::CorrelationHistogram;
use crate::emitter::EmitterParams;
use crate::error::{Error, Result};
use crate::optics::Polarization;

/// Starting point and free/fixed choices for [`fit_hom_pair`].
#[derive(Debug, Clone, Copy)]
pub struct HomFitSetup {
    pub emitter: EmitterParams,
    /// Δτ in ps.
    pub arm_delay: f64,
    /// Per-detector jitter σ in ps.
    pub jitter_sigma: f64,
    pub mode_overlap: f64,
    /// τ_c in seconds.
    pub coherence_time: f64,
    pub fit_emitter: bool,
    pub fit_arm_delay: bool,
    pub fit_jitter: bool,
    /// Bins closer than this (ps) to the window edge are left out.
    pub edge_margin: f64,
}

impl HomFitSetup {
    pub fn new(emitter: EmitterParams, arm_delay: f64, jitter_sigma: f64) -> Self {
        HomFitSetup {
            emitter,
            arm_delay,
            jitter_sigma,
            mode_overlap: 0.5,
            coherence_time: 0.5e-9,
            fit_emitter: false,
            fit_arm_delay: false,
            fit_jitter: true,
            edge_margin: 1000.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HomFit {
    pub fit: FitResult,
    /// (P⊥(0) − P∥(0))/P⊥(0) of the fitted jitter-free curves.
    pub visibility: f64,
    pub visibility_error: f64,
    /// The same ratio for the jitter-smeared curves, as read off raw data.
    pub visibility_detected: f64,
    pub mode_overlap: f64,
    /// τ_c in seconds.
    pub coherence_time: f64,
    /// Per-detector jitter σ in ps.
    pub jitter_sigma: f64,
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s[s.len() / 2]
}

fn visibility_at_zero(p: &[f64]) -> f64 {
    match HomPair::curve(p) {
        Some(c) => {
            let orth = c.orthogonal(0.0);
            (orth - c.parallel(0.0)) / orth
        }
        None => f64::NAN,
    }
}

/// Fits both histograms with Poisson weights and reports the τ = 0
/// visibility with its delta-method error.
pub fn fit_hom_pair(
    parallel: &CorrelationHistogram,
    orthogonal: &CorrelationHistogram,
    setup: &HomFitSetup,
) -> Result<HomFit> {
    parallel.same_geometry(orthogonal)?;
    setup.emitter.validate()?;
    let limit = parallel.window() as f64 - setup.edge_margin;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for h in [parallel, orthogonal] {
        for (i, &c) in h.counts().iter().enumerate() {
            let tau = h.tau_ps(i) as f64;
            if tau.abs() <= limit {
                x.push(tau * 1e-3);
                y.push(c as f64);
            }
        }
    }
    let n_parallel = x.len() / 2;
    if n_parallel < 10 {
        return Err(Error::Validation("too few bins inside the fit range".into()));
    }
    if y.iter().all(|&c| c == 0.0) {
        return Err(Error::Numerical("histograms are empty".into()));
    }

    let model = HomPair {
        n_parallel,
        bin_width: parallel.bin_width() as f64 * 1e-3,
    };
    let e = &setup.emitter;
    let initial = vec![
        e.rabi_frequency * 1e-9,
        e.dephasing_rate * 1e-9,
        e.decay_rate * 1e-9,
        setup.arm_delay * 1e-3,
        setup.jitter_sigma * 1e-3,
        setup.mode_overlap.clamp(0.0, 1.0),
        setup.coherence_time * 1e9,
        median(&y[..n_parallel]).max(1.0),
        median(&y[n_parallel..]).max(1.0),
    ];
    let inf = f64::INFINITY;
    let mut problem = FitProblem::new(&model, x, y, initial)
        .with_poisson_weights()
        .bound(HomPair::RABI, 0.0, inf)
        .bound(HomPair::DEPHASING, 0.0, inf)
        .bound(HomPair::DECAY, 1e-6, inf)
        .bound(HomPair::ARM_DELAY, 1e-3, inf)
        .bound(HomPair::JITTER, 0.0, inf)
        .bound(HomPair::MODE_OVERLAP, 0.0, 1.0)
        .bound(HomPair::COHERENCE_TIME, 1e-4, inf)
        .bound(HomPair::NORM_PARALLEL, 0.0, inf)
        .bound(HomPair::NORM_ORTHOGONAL, 0.0, inf);
    if !setup.fit_emitter {
        problem = problem.fix(HomPair::RABI).fix(HomPair::DEPHASING).fix(HomPair::DECAY);
    }
    if !setup.fit_arm_delay {
        problem = problem.fix(HomPair::ARM_DELAY);
    }
    if !setup.fit_jitter {
        problem = problem.fix(HomPair::JITTER);
    }
    let fit = least_squares(&problem)?;

    let p = &fit.parameters;
    let visibility = visibility_at_zero(p);
    if !visibility.is_finite() {
        return Err(Error::Numerical("fitted curves give no finite visibility".into()));
    }
    let mut grad = vec![0.0; p.len()];
    for (k, g) in grad.iter_mut().enumerate() {
        if fit.covariance[k][k] == 0.0 {
            continue;
        }
        let h = super::lm::fd_step(p[k]);
        let (lo, hi) = if k == HomPair::MODE_OVERLAP { (0.0, 1.0) } else { (0.0, f64::INFINITY) };
        let (mut up, mut down) = (p.clone(), p.clone());
        up[k] = (p[k] + h).min(hi);
        down[k] = (p[k] - h).max(lo);
        *g = (visibility_at_zero(&up) - visibility_at_zero(&down)) / (up[k] - down[k]);
    }
    let mut var = 0.0;
    for i in 0..p.len() {
        for j in 0..p.len() {
            var += grad[i] * fit.covariance[i][j] * grad[j];
        }
    }

    let detected = HomPair::curve(p)
        .map(|c| {
            let sigma = p[HomPair::JITTER] * 1e-9;
            let orth = c.convolved(0.0, Polarization::Orthogonal, sigma);
            (orth - c.convolved(0.0, Polarization::Parallel, sigma)) / orth
        })
        .unwrap_or(f64::NAN);

    Ok(HomFit {
        visibility,
        visibility_detected: detected,
        visibility_error: var.max(0.0).sqrt(),
        mode_overlap: p[HomPair::MODE_OVERLAP],
        coherence_time: p[HomPair::COHERENCE_TIME] * 1e-9,
        jitter_sigma: p[HomPair::JITTER] * 1e3,
        fit,
    })
}
