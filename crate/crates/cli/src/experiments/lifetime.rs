//! Pulsed excitation: one photon per π pulse, delays exponential in the
//! radiative lifetime, histogrammed against the laser sync and fitted with
//! exponential plus offset beyond the jitter-smeared rise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp;
use serde_json::json;

use qsim_core::correlator::cross_correlate;
use qsim_core::fitting::fit_lifetime;
use qsim_core::optics::apply_detector;
use qsim_core::{derive_seed, TimeTagStream};

use super::{fmt, with_fit, write_json, write_tags, Summary};
use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::Output;

const MIN_FIT_POINTS: usize = 8;

pub fn run(cfg: &RunConfig, out: &mut Output) -> CliResult<Summary> {
    let e = cfg.emitter_params()?;
    let det = cfg.detector_model();
    let l = cfg.lifetime.clone().unwrap_or_default();
    let seed = cfg.seed();
    let lifetime_ps = e.lifetime() * 1e12;

    let duration = l
        .pulses
        .checked_mul(l.period_ps)
        .ok_or_else(|| CliError::field("lifetime.pulses", "pulses × period overflows"))?;
    let sync = TimeTagStream::new(0, (0..l.pulses).map(|k| k * l.period_ps).collect(), duration)?;
    let delay = Exp::new(1.0 / lifetime_ps).map_err(|_| CliError::field("emitter.lifetime_ps", "invalid"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
    let mut tags: Vec<u64> = (0..l.pulses)
        .map(|k| k * l.period_ps + rng.sample(delay).round() as u64)
        .filter(|&t| t < duration)
        .collect();
    // a delay longer than the period can overtake the next pulse's photon
    tags.sort_unstable();
    tags.dedup();
    let photons = TimeTagStream::new(1, tags, duration)?;
    let clicks = apply_detector(&photons, &det, derive_seed(seed, 1))
        .map_err(|err| CliError::from(err).context("detector"))?
        .with_channel(1);
    write_tags(out, cfg.tag_format, &[&sync, &clicks])?;

    let hist = cross_correlate(&sync, &clicks, l.bin_ps, l.window_ps)?;
    out.write("lifetime_histogram.csv", |w| {
        writeln!(w, "tau_ps,counts")?;
        for (i, c) in hist.counts().iter().enumerate() {
            writeln!(w, "{},{c}", hist.tau_ps(i))?;
        }
        Ok(())
    })?;

    let start = l.fit_start_ps.unwrap_or(0.0);
    let (mut t, mut y, mut sigma) = (Vec::new(), Vec::new(), Vec::new());
    for (i, &c) in hist.counts().iter().enumerate() {
        let tau = hist.tau_ps(i) as f64;
        if tau >= start && hist.effective_width(i) == l.bin_ps {
            t.push(tau * 1e-3);
            y.push(c as f64);
            sigma.push((c.max(1) as f64).sqrt());
        }
    }
    if t.len() < MIN_FIT_POINTS {
        return Err(CliError::field(
            "lifetime.fit_start_ps",
            format!("leaves {} bins to fit, need {MIN_FIT_POINTS}", t.len()),
        ));
    }
    let fit = fit_lifetime(&t, &y, Some(&sigma)).map_err(|err| CliError::from(err).context("lifetime fit"))?;
    let fitted = fit.get("lifetime").unwrap_or(f64::NAN) * 1e3;
    let error = fit.error_of("lifetime").unwrap_or(f64::NAN) * 1e3;
    let head = json!({
        "pulses": l.pulses,
        "clicks": clicks.len(),
        "fit_start_ps": start,
        "lifetime_ps": fitted,
        "lifetime_error_ps": error,
    });
    write_json(out, "lifetime_fit.json", &with_fit(head, &fit))?;

    let mut s = Summary::default();
    s.push("lifetime_ps", fmt(fitted, 1))
        .push("lifetime_err_ps", fmt(error, 1))
        .push("clicks", clicks.len());
    Ok(s)
}
