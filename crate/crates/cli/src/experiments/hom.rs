//! HOM behind the unbalanced Mach-Zehnder: co- and cross-polarized
//! coincidence histograms, then a joint fit for the visibility. A modulator
//! section puts the same sideband ladder on both photons.

use serde_json::json;

use qsim_core::correlator::normalize_to_plateau;
use qsim_core::derive_seed;
use qsim_core::fitting::{fit_hom_pair, HomFitSetup};
use qsim_core::modulator::{sideband_amplitudes, DEFAULT_EPSILON};
use qsim_core::optics::{simulate_hom_clicks_with, HomSimOptions};
use qsim_core::Polarization;

use super::{fmt, with_fit, write_json, Summary};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::Output;

const PLATEAU_FRACTION: f64 = 0.2;
// the fit starts from a small nonzero jitter so it can move off the bound
const MIN_JITTER_GUESS_PS: f64 = 20.0;

pub fn run(cfg: &RunConfig, out: &mut Output) -> CliResult<Summary> {
    let e = cfg.emitter_params()?;
    let det = cfg.detector_model();
    let h = cfg.hom.clone().ok_or_else(|| CliError::field("hom", "missing"))?;
    let seed = cfg.seed();
    let ladder = match cfg.modulator_config() {
        Some(c) => Some(sideband_amplitudes(&c?, 0.0, DEFAULT_EPSILON)?),
        None => None,
    };
    let opts = HomSimOptions {
        bin_width: h.bin_ps,
        ..HomSimOptions::default()
    };

    let mut hists = Vec::new();
    for (k, pol) in [Polarization::Parallel, Polarization::Orthogonal].into_iter().enumerate() {
        let hc = cfg.hom_config(pol)?;
        let hist = simulate_hom_clicks_with(&e, &hc, &det, ladder.as_ref(), h.pairs, derive_seed(seed, k as u64), opts)
            .map_err(|err| CliError::from(err).context("hom"))?;
        hists.push(hist);
    }
    let (par, orth) = (&hists[0], &hists[1]);
    let g2_par = normalize_to_plateau(par, PLATEAU_FRACTION)?;
    let g2_orth = normalize_to_plateau(orth, PLATEAU_FRACTION)?;
    out.write("hom_parallel.csv", |w| Ok(par.write_csv(w, &g2_par)?))?;
    out.write("hom_orthogonal.csv", |w| Ok(orth.write_csv(w, &g2_orth)?))?;
    let dip = g2_par[par.center_index()];

    let setup = HomFitSetup::new(e, h.arm_delay_ps, det.jitter_sigma.max(MIN_JITTER_GUESS_PS));
    let fit = fit_hom_pair(par, orth, &setup).map_err(|err| CliError::from(err).context("hom fit"))?;
    let head = json!({
        "pairs": h.pairs,
        "dip": dip,
        "visibility": fit.visibility,
        "visibility_error": fit.visibility_error,
        "visibility_detected": fit.visibility_detected,
        "mode_overlap": fit.mode_overlap,
        "coherence_time_ps": fit.coherence_time * 1e12,
        "jitter_ps": fit.jitter_sigma,
    });
    write_json(out, "hom_fit.json", &with_fit(head, &fit.fit))?;

    let mut s = Summary::default();
    s.push("visibility", fmt(fit.visibility, 3))
        .push("visibility_err", fmt(fit.visibility_error, 3))
        .push("dip", fmt(dip, 3));
    Ok(s)
}
