use std::f64::consts::PI;
use std::io::Write;

use super::SidebandLadder;
use crate::error::{Error, Result};

const MIN_POINTS_PER_FWHM: f64 = 5.0;
const POPULATED: f64 = 1e-9;

/// Unit-area Lorentzian of full width `fwhm` evaluated at offset `f`.
#[inline]
pub fn lorentzian(f: f64, fwhm: f64) -> f64 {
    let hw = 0.5 * fwhm;
    hw / (PI * (f * f + hw * hw))
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n).map(|i| lo + step * i as f64).collect()
        }
    }
}

/// Scanning Fabry-Pérot transmission spectrum, offsets in Hz from ω₀/2π.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub offsets: Vec<f64>,
    pub intensities: Vec<f64>,
    pub etalon_linewidth: f64,
}

impl SpectrumTrace {
    /// Trapezoid integral of intensity over the scan.
    pub fn integral(&self) -> f64 {
        self.offsets
            .windows(2)
            .zip(self.intensities.windows(2))
            .map(|(f, y)| 0.5 * (f[1] - f[0]) * (y[0] + y[1]))
            .sum()
    }

    /// Indices of strict local maxima.
    pub fn peak_indices(&self) -> Vec<usize> {
        let y = &self.intensities;
        (1..y.len().saturating_sub(1))
            .filter(|&i| y[i] > y[i - 1] && y[i] > y[i + 1])
            .collect()
    }

    /// Writes `offset_hz,intensity` CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["offset_hz", "intensity"]).map_err(csv_err)?;
        for (f, y) in self.offsets.iter().zip(&self.intensities) {
            w.write_record([f.to_string(), y.to_string()]).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Validation(format!("csv: {other:?}")),
    }
}

/// Spectrum seen through the etalon: every mode is a Lorentzian of width
/// `source_linewidth + etalon_linewidth` weighted by its intensity.
pub fn spectrum_trace(
    ladder: &SidebandLadder,
    source_linewidth: f64,
    etalon_linewidth: f64,
    scan: &[f64],
) -> Result<SpectrumTrace> {
    if !(source_linewidth.is_finite() && source_linewidth > 0.0) {
        return Err(Error::domain("source_linewidth", format!("must be > 0, got {source_linewidth}")));
    }
    if !(etalon_linewidth.is_finite() && etalon_linewidth > 0.0) {
        return Err(Error::domain("etalon_linewidth", format!("must be > 0, got {etalon_linewidth}")));
    }
    if scan.len() < 2 {
        return Err(Error::Sampling("scan needs at least two points".into()));
    }
    if scan.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Validation("scan grid must be strictly increasing".into()));
    }
    let width = source_linewidth + etalon_linewidth;
    let max_step = scan.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if max_step * MIN_POINTS_PER_FWHM > width * (1.0 + 1e-12) {
        return Err(Error::Sampling(format!(
            "scan step {max_step} Hz gives fewer than {MIN_POINTS_PER_FWHM} points per {width} Hz FWHM"
        )));
    }
    let populated: Vec<(f64, f64)> = ladder
        .orders()
        .map(|n| (n as f64 * ladder.mode_spacing, ladder.intensity(n)))
        .collect();
    if let (Some(lo), Some(hi)) = (
        populated.iter().filter(|(_, w)| *w > POPULATED).map(|(f, _)| *f).reduce(f64::min),
        populated.iter().filter(|(_, w)| *w > POPULATED).map(|(f, _)| *f).reduce(f64::max),
    ) {
        if scan[0] > lo || *scan.last().unwrap() < hi {
            return Err(Error::Validation(format!(
                "scan [{}, {}] Hz does not cover populated modes [{lo}, {hi}] Hz",
                scan[0],
                scan.last().unwrap()
            )));
        }
    }
    let intensities = scan
        .iter()
        .map(|&f| populated.iter().map(|&(c, w)| w * lorentzian(f - c, width)).sum())
        .collect();
    Ok(SpectrumTrace {
        offsets: scan.to_vec(),
        intensities,
        etalon_linewidth,
    })
}
