//! Ready-made fits for lifetime traces, g² curves and etalon spectra.

use super::lm::{least_squares, FitProblem, FitResult};
use super::models::{exp_offset_initial_guess, ExpOffset, G2Model, LorentzianComb};
use crate::emitter::EmitterParams;
use crate::error::{Error, Result};
use crate::modulator::{lorentzian, SpectrumTrace};

/// Fits amplitude·e^{−t/T} + offset to a decay trace (t in ns), starting
/// from the three-point estimate.
pub fn fit_lifetime(t: &[f64], y: &[f64], sigma: Option<&[f64]>) -> Result<FitResult> {
    let guess = exp_offset_initial_guess(t, y)?;
    let mut problem = FitProblem::new(&ExpOffset, t.to_vec(), y.to_vec(), guess.to_vec());
    problem.initial[1] = problem.initial[1].max(1e-9);
    problem = problem.bound(1, 1e-9, f64::INFINITY);
    if let Some(s) = sigma {
        problem = problem.with_sigma(s.to_vec());
    }
    least_squares(&problem)
}

#[derive(Debug, Clone)]
pub struct EmitterFit {
    pub params: EmitterParams,
    pub fit: FitResult,
}

/// Recovers the Rabi frequency and coherence decay rate from a normalized
/// g²(τ) curve (τ in ns) with the population decay rate held at
/// `decay_rate` (rad/ns), e.g. from [`fit_lifetime`].
///
/// g² alone only constrains (γ + γ₂) and Ω² − (γ − γ₂)²/4, so γ₂ must come
/// from elsewhere. `initial` is (rabi, dephasing) in rad/ns; `jitter` is the
/// per-detector σ in ns, held fixed.
pub fn fit_emitter(
    tau: &[f64],
    g2: &[f64],
    sigma: Option<&[f64]>,
    decay_rate: f64,
    initial: (f64, f64),
    jitter: f64,
) -> Result<EmitterFit> {
    if !(decay_rate.is_finite() && decay_rate > 0.0) {
        return Err(Error::domain("decay_rate", format!("must be > 0, got {decay_rate}")));
    }
    let mut problem = FitProblem::new(
        &G2Model,
        tau.to_vec(),
        g2.to_vec(),
        vec![initial.0, initial.1, decay_rate, 1.0, 0.0, jitter],
    )
    .bound(G2Model::RABI, 0.0, f64::INFINITY)
    .bound(G2Model::DEPHASING, 0.0, f64::INFINITY)
    .fix(G2Model::DECAY)
    .fix(G2Model::AMPLITUDE)
    .fix(G2Model::BASELINE)
    .fix(G2Model::JITTER);
    if let Some(s) = sigma {
        problem = problem.with_sigma(s.to_vec());
    }
    let fit = least_squares(&problem)?;
    let p = &fit.parameters;
    let params = EmitterParams::new(p[0] * 1e9, p[2] * 1e9, p[1] * 1e9)?;
    Ok(EmitterFit { params, fit })
}

#[derive(Debug, Clone)]
pub struct SidebandFit {
    /// (order, integrated weight) pairs.
    pub weights: Vec<(i32, f64)>,
    pub spacing: f64,
    pub width: f64,
    pub fit: FitResult,
}

impl SidebandFit {
    pub fn weight(&self, order: i32) -> Option<f64> {
        self.weights.iter().find(|(n, _)| *n == order).map(|(_, w)| *w)
    }
}

/// Fits a Lorentzian comb of orders −max_order..=max_order to an etalon
/// trace. Spacing and width guesses are in Hz; results are in Hz and in
/// integrated intensity. With `free_spacing` false the spacing stays at the
/// given drive frequency, which keeps the fit well posed when no sideband is
/// populated.
pub fn fit_sideband_comb(
    trace: &SpectrumTrace,
    spacing: f64,
    width: f64,
    max_order: u32,
    free_spacing: bool,
) -> Result<SidebandFit> {
    if !(spacing > 0.0 && width > 0.0) {
        return Err(Error::Validation("spacing and width guesses must be positive".into()));
    }
    let comb = LorentzianComb::symmetric(max_order);
    let x: Vec<f64> = trace.offsets.iter().map(|f| f * 1e-9).collect();
    let y: Vec<f64> = trace.intensities.iter().map(|v| v * 1e9).collect();
    let (s, w) = (spacing * 1e-9, width * 1e-9);
    let peak = lorentzian(0.0, w);
    let mut initial: Vec<f64> = (comb.min_order..=comb.max_order)
        .map(|n| {
            let target = n as f64 * s;
            let i = x.partition_point(|&v| v < target).min(x.len() - 1);
            (y[i] / peak).max(0.0)
        })
        .collect();
    initial.extend([s, w, 0.0]);
    let mut problem = FitProblem::new(&comb, x, y, initial)
        .bound(comb.spacing_index(), 0.0, f64::INFINITY)
        .bound(comb.width_index(), 1e-12, f64::INFINITY);
    for n in comb.min_order..=comb.max_order {
        problem = problem.bound(comb.weight_index(n), 0.0, f64::INFINITY);
    }
    if !free_spacing {
        problem = problem.fix(comb.spacing_index());
    }
    let fit = least_squares(&problem)?;
    let p = &fit.parameters;
    Ok(SidebandFit {
        weights: (comb.min_order..=comb.max_order)
            .map(|n| (n, p[comb.weight_index(n)]))
            .collect(),
        spacing: p[comb.spacing_index()] * 1e9,
        width: p[comb.width_index()] * 1e9,
        fit,
    })
}
