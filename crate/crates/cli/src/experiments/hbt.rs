//! HBT: one emitter, a 50:50 splitter and two detectors; g² from the
//! cross-correlation, then a jitter-convolved g² fit with γ₂ held at the
//! configured value.

use serde_json::json;

use qsim_core::correlator::{cross_correlate, normalize_to_g2, CorrelationHistogram};
use qsim_core::emitter::{bloch_steady_state_population, sample_emissions};
use qsim_core::fitting::{least_squares, FitProblem, FitResult, G2Model};
use qsim_core::optics::{apply_detector, split_stream};
use qsim_core::{derive_seed, EmitterParams};

use super::{fmt, with_fit, write_json, write_tags, Summary};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::Output;

// fit bound on the per-detector jitter, ns
const MAX_JITTER_NS: f64 = 5.0;

pub fn run(cfg: &RunConfig, out: &mut Output) -> CliResult<Summary> {
    let e = cfg.emitter_params()?;
    let det = cfg.detector_model();
    let h = cfg.hbt.clone().unwrap_or_default();
    let seed = cfg.seed();

    let rate = e.decay_rate * bloch_steady_state_population(&e)?;
    let duration = (1.05 * h.photons as f64 / rate * 1e12).ceil() as u64;
    let photons = sample_emissions(&e, duration, derive_seed(seed, 0))?;
    let (a, b) = split_stream(&photons, derive_seed(seed, 1));
    let a = apply_detector(&a, &det, derive_seed(seed, 2))
        .map_err(|err| CliError::from(err).context("detector"))?
        .with_channel(0);
    let b = apply_detector(&b, &det, derive_seed(seed, 3))
        .map_err(|err| CliError::from(err).context("detector"))?
        .with_channel(1);
    write_tags(out, cfg.tag_format, &[&a, &b])?;

    let hist = cross_correlate(&a, &b, h.bin_ps, h.window_ps)?;
    let g2 = normalize_to_g2(&hist)?;
    out.write("hbt_histogram.csv", |w| Ok(hist.write_csv(w, &g2)?))?;
    let g2_zero = g2[hist.center_index()];

    let fit = fit_g2(&hist, &g2, &e, det.jitter_sigma)?;
    let jitter_ps = fit.parameters[G2Model::JITTER] * 1e3;
    let head = json!({
        "photons": photons.len(),
        "clicks": [a.len(), b.len()],
        "g2_zero": g2_zero,
        "jitter_ps": jitter_ps,
        "jitter_error_ps": fit.errors()[G2Model::JITTER] * 1e3,
    });
    write_json(out, "g2_fit.json", &with_fit(head, &fit))?;

    let mut s = Summary::default();
    s.push("g2_zero", fmt(g2_zero, 4))
        .push("photons", photons.len())
        .push("jitter_ps", fmt(jitter_ps, 1));
    Ok(s)
}

/// Weighted fit of the normalized histogram; counting errors are carried
/// through the per-bin normalization.
fn fit_g2(hist: &CorrelationHistogram, g2: &[f64], e: &EmitterParams, jitter_ps: f64) -> CliResult<FitResult> {
    let m = hist.meta;
    let scale = m.duration as f64 / (m.count_a as f64 * m.count_b as f64);
    let (mut x, mut y, mut sigma) = (Vec::new(), Vec::new(), Vec::new());
    for (i, &c) in hist.counts().iter().enumerate() {
        let w = hist.effective_width(i);
        if w == 0 {
            continue;
        }
        x.push(hist.tau_ps(i) as f64 * 1e-3);
        y.push(g2[i]);
        sigma.push((c.max(1) as f64).sqrt() * scale / w as f64);
    }
    let initial = vec![
        1.1 * e.rabi_frequency * 1e-9,
        0.9 * e.dephasing_rate * 1e-9,
        e.decay_rate * 1e-9,
        1.0,
        0.0,
        jitter_ps.max(30.0) * 1e-3,
    ];
    let problem = FitProblem::new(&G2Model, x, y, initial)
        .with_sigma(sigma)
        .bound(G2Model::RABI, 0.0, f64::INFINITY)
        .bound(G2Model::DEPHASING, 0.0, f64::INFINITY)
        .fix(G2Model::DECAY)
        .fix(G2Model::AMPLITUDE)
        .fix(G2Model::BASELINE)
        .bound(G2Model::JITTER, 0.0, MAX_JITTER_NS);
    least_squares(&problem).map_err(|err| CliError::from(err).context("g2 fit"))
}
