//! Subcommands that work on external data or print a single table.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use qsim_core::correlator::{
    auto_correlate, cross_correlate, normalize_to_g2, normalize_to_plateau, read_tags_auto,
};
use qsim_core::modulator::{bessel_j, truncation_order, ModulatorConfig};
use qsim_core::TimeTagStream;

use crate::error::{CliError, CliResult};
use crate::experiments::spectrum::trace_for;
use crate::output::write_atomic;

pub struct CorrelateArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    pub channel_a: Option<u8>,
    pub channel_b: Option<u8>,
    pub bin_ps: u64,
    pub window_ps: u64,
    pub plateau: Option<f64>,
    pub out: Option<PathBuf>,
}

fn load_tags(path: &Path) -> CliResult<BTreeMap<u8, TimeTagStream>> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    read_tags_auto(&bytes).map_err(|e| CliError::from(e).context(&path.display().to_string()))
}

fn pick(streams: &BTreeMap<u8, TimeTagStream>, channel: Option<u8>, path: &Path) -> CliResult<(u8, TimeTagStream)> {
    let found = match channel {
        Some(c) => streams.get_key_value(&c),
        None => streams.iter().next(),
    };
    found.map(|(c, s)| (*c, s.clone())).ok_or_else(|| {
        let have: Vec<String> = streams.keys().map(|c| c.to_string()).collect();
        CliError::Validation(format!(
            "{}: no tags on channel {} (channels present: [{}])",
            path.display(),
            channel.map_or("any".to_string(), |c| c.to_string()),
            have.join(", ")
        ))
    })
}

/// Returns the summary line; the CSV goes to `out` or stdout.
pub fn correlate_file(args: &CorrelateArgs) -> CliResult<String> {
    let tags_a = load_tags(&args.a)?;
    let (ch_a, a) = pick(&tags_a, args.channel_a, &args.a)?;
    let same_file = args.a == args.b;
    let tags_b = if same_file { tags_a.clone() } else { load_tags(&args.b)? };
    let (ch_b, b) = pick(&tags_b, args.channel_b, &args.b)?;

    // one stream against itself: leave out the zero-delay self pairs
    let hist = if same_file && ch_a == ch_b {
        auto_correlate(&a, args.bin_ps, args.window_ps)?
    } else {
        cross_correlate(&a, &b, args.bin_ps, args.window_ps)?
    };
    let g2 = match args.plateau {
        Some(f) => normalize_to_plateau(&hist, f)?,
        None => normalize_to_g2(&hist)?,
    };
    match &args.out {
        Some(path) => write_atomic(path, |w| Ok(hist.write_csv(w, &g2)?))?,
        None => hist.write_csv(std::io::stdout().lock(), &g2)?,
    }
    Ok(format!(
        "pairs={} center_g2={:.4} bins={}",
        hist.total(),
        g2[hist.center_index()],
        hist.len()
    ))
}

/// `order,j,j_sq` for |n| up to `max_order` or the ε truncation order.
pub fn bessel(beta: f64, max_order: Option<u32>, out: &mut dyn Write) -> CliResult<()> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(CliError::field("beta", format!("must be finite and >= 0, got {beta}")));
    }
    let n_max = match max_order {
        Some(n) => n as i32,
        None => truncation_order(beta, qsim_core::modulator::DEFAULT_EPSILON)? as i32,
    };
    writeln!(out, "order,j,j_sq")?;
    for n in -n_max..=n_max {
        let j = bessel_j(n, beta);
        writeln!(out, "{n},{j},{}", j * j)?;
    }
    Ok(())
}

pub fn spectrum(
    beta: f64,
    drive_ghz: f64,
    source_mhz: f64,
    etalon_mhz: f64,
    out: Option<&Path>,
) -> CliResult<()> {
    let config = ModulatorConfig::new(beta, drive_ghz * 1e9, 0.0).map_err(|e| match e {
        qsim_core::Error::ParameterDomain { field: "modulation_index", reason } => CliError::field("beta", reason),
        qsim_core::Error::ParameterDomain { field: "drive_frequency", reason } => CliError::field("drive-ghz", reason),
        other => other.into(),
    })?;
    for (name, v) in [("linewidth-mhz", source_mhz), ("etalon-mhz", etalon_mhz)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::field(name, format!("must be finite and > 0, got {v}")));
        }
    }
    let (_, trace) = trace_for(&config, source_mhz * 1e6, etalon_mhz * 1e6)?;
    match out {
        Some(path) => write_atomic(path, |w| Ok(trace.write_csv(w)?)),
        None => Ok(trace.write_csv(std::io::stdout().lock())?),
    }
}
