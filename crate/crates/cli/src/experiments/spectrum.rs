//! Etalon spectra of the phase-modulated emitter line and the sideband comb
//! fits, single shot or swept over the modulation index.

use rayon::prelude::*;
use serde_json::{json, Value};

use qsim_core::fitting::{fit_sideband_comb, SidebandFit};
use qsim_core::modulator::{
    bessel_j, linear_grid, sideband_amplitudes, spectrum_trace, ModulatorConfig, SidebandLadder, SpectrumTrace,
    DEFAULT_EPSILON,
};

use super::{fit_json, fmt, write_json, Summary};
use crate::config::{ModulatorSection, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::Output;

const POINTS_PER_FWHM: f64 = 10.0;
// scan margin beyond the outermost mode, in linewidths
const MARGIN_WIDTHS: f64 = 20.0;

/// Symmetric scan covering every mode of the ladder.
pub(crate) fn default_scan(ladder: &SidebandLadder, width: f64) -> Vec<f64> {
    let reach = ladder.min_order().unsigned_abs().max(ladder.max_order().unsigned_abs()) as f64;
    let half = reach * ladder.mode_spacing + MARGIN_WIDTHS * width;
    let step = width / POINTS_PER_FWHM;
    let n = (2.0 * half / step).ceil() as usize + 1;
    linear_grid(-half, half, n)
}

pub(crate) fn trace_for(config: &ModulatorConfig, source: f64, etalon: f64) -> CliResult<(SidebandLadder, SpectrumTrace)> {
    let ladder = sideband_amplitudes(config, 0.0, DEFAULT_EPSILON)?;
    let scan = default_scan(&ladder, source + etalon);
    let trace = spectrum_trace(&ladder, source, etalon, &scan)?;
    Ok((ladder, trace))
}

fn linewidths(m: &ModulatorSection) -> (f64, f64) {
    (m.source_linewidth_mhz * 1e6, m.etalon_linewidth_mhz * 1e6)
}

fn comb_fit(trace: &SpectrumTrace, m: &ModulatorSection) -> CliResult<SidebandFit> {
    let (source, etalon) = linewidths(m);
    // spacing held at the drive: at β = 0 it is not identifiable
    fit_sideband_comb(trace, m.drive_ghz * 1e9, 1.5 * (source + etalon), m.max_order, false)
        .map_err(|err| CliError::from(err).context("comb fit"))
}

fn comb_json(fit: &SidebandFit) -> Value {
    json!({
        "weights": fit.weights.iter().map(|(n, w)| json!({"order": n, "weight": w})).collect::<Vec<_>>(),
        "spacing_hz": fit.spacing,
        "width_hz": fit.width,
        "fit": fit_json(&fit.fit),
    })
}

pub fn run(cfg: &RunConfig, out: &mut Output) -> CliResult<Summary> {
    let m = cfg.modulator.clone().ok_or_else(|| CliError::field("modulator", "missing"))?;
    let config = cfg.modulator_config().expect("modulator present")?;
    let (source, etalon) = linewidths(&m);
    let (ladder, trace) = trace_for(&config, source, etalon)?;
    out.write("spectrum.csv", |w| Ok(trace.write_csv(w)?))?;
    out.write("ladder.csv", |w| {
        writeln!(w, "order,frequency_hz,re,im,intensity")?;
        for n in ladder.orders() {
            let a = ladder.amplitude(n);
            writeln!(w, "{n},{},{},{},{}", ladder.mode_frequency(n), a.re, a.im, ladder.intensity(n))?;
        }
        Ok(())
    })?;
    let fit = comb_fit(&trace, &m)?;
    write_json(out, "comb_fit.json", &comb_json(&fit))?;

    let w0 = fit.weight(0).unwrap_or(f64::NAN);
    let w1 = fit.weight(1).unwrap_or(f64::NAN);
    let total: f64 = fit.weights.iter().map(|(_, w)| w).sum();
    let mut s = Summary::default();
    s.push("carrier_to_first", fmt(w0 / w1, 3))
        .push("carrier_fraction", format!("{:.3e}", w0 / total))
        .push("modes", ladder.orders().count());
    Ok(s)
}

pub fn sweep(cfg: &RunConfig, out: &mut Output) -> CliResult<Summary> {
    let m = cfg.modulator.clone().ok_or_else(|| CliError::field("modulator", "missing"))?;
    let sw = cfg.sweep.clone().unwrap_or_default();
    let (source, etalon) = linewidths(&m);
    let steps = ((sw.beta_max - sw.beta_min) / sw.beta_step + 1e-9).floor() as usize;
    let betas: Vec<f64> = (0..=steps).map(|k| sw.beta_min + k as f64 * sw.beta_step).collect();

    let fits: Vec<(f64, SidebandFit)> = betas
        .par_iter()
        .map(|&beta| {
            let config = ModulatorConfig::new(beta, m.drive_ghz * 1e9, m.drive_phase)?;
            let (_, trace) = trace_for(&config, source, etalon)?;
            Ok((beta, comb_fit(&trace, &m)?))
        })
        .collect::<CliResult<_>>()
        .map_err(|e| e.context("bessel sweep"))?;

    let mut worst = 0.0f64;
    out.write("bessel_sweep.csv", |w| {
        writeln!(w, "beta,w0,w1,w2,j0_sq,j1_sq,j2_sq")?;
        for (beta, fit) in &fits {
            let wn: Vec<f64> = (0..=2).map(|n| fit.weight(n).unwrap_or(f64::NAN)).collect();
            let jn: Vec<f64> = (0..=2).map(|n| bessel_j(n, *beta).powi(2)).collect();
            for (a, b) in wn.iter().zip(&jn) {
                worst = worst.max((a - b).abs());
            }
            writeln!(w, "{beta},{},{},{},{},{},{}", wn[0], wn[1], wn[2], jn[0], jn[1], jn[2])?;
        }
        Ok(())
    })?;
    let all: Vec<Value> = fits
        .iter()
        .map(|(beta, fit)| {
            let mut v = comb_json(fit);
            v["beta"] = json!(beta);
            v
        })
        .collect();
    write_json(out, "bessel_sweep.json", &Value::Array(all))?;

    let mut s = Summary::default();
    s.push("points", fits.len()).push("max_weight_dev", format!("{worst:.2e}"));
    Ok(s)
}
