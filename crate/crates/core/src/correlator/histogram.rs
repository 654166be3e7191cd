use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::emitter::TimeTagStream;
use crate::error::{Error, Result};
use crate::modulator::csv_err;

/// Acquisition bookkeeping carried alongside the counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramMeta {
    pub count_a: u64,
    pub count_b: u64,
    /// Acquisition time in ps.
    pub duration: u64,
}

/// Coincidence counts binned by delay `t_b − t_a`.
///
/// Bin `k` (k = −K..=K, K = window / bin_width) is centred on `k·bin_width`.
/// A delay exactly on a bin edge goes to the bin further from zero, so the
/// layout is mirror symmetric; on the integer-picosecond grid the centre bin
/// of an even `bin_width` therefore holds one delay value fewer. Delays beyond
/// `window` are never counted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationHistogram {
    bin_width: u64,
    window: u64,
    counts: Vec<u64>,
    pub meta: HistogramMeta,
}

impl CorrelationHistogram {
    pub fn new(bin_width: u64, window: u64) -> Result<Self> {
        if bin_width < 1 {
            return Err(Error::Validation("bin width must be at least 1 ps".into()));
        }
        if window < bin_width {
            return Err(Error::Validation(format!(
                "window {window} ps is shorter than the bin width {bin_width} ps"
            )));
        }
        let half = window / bin_width;
        Ok(CorrelationHistogram {
            bin_width,
            window,
            counts: vec![0; 2 * half as usize + 1],
            meta: HistogramMeta::default(),
        })
    }

    pub fn bin_width(&self) -> u64 {
        self.bin_width
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn half_bins(&self) -> usize {
        self.counts.len() / 2
    }

    /// Index of the bin centred on τ = 0.
    pub fn center_index(&self) -> usize {
        self.half_bins()
    }

    /// Bin centre in ps for storage index `i`.
    pub fn tau_ps(&self, i: usize) -> i64 {
        (i as i64 - self.half_bins() as i64) * self.bin_width as i64
    }

    /// Storage index of integer delay `d` ps, if it is inside the window.
    #[inline]
    pub fn index_of(&self, d: i64) -> Option<usize> {
        let ad = d.unsigned_abs();
        if ad > self.window {
            return None;
        }
        let k = (2 * ad + self.bin_width) / (2 * self.bin_width);
        let half = self.half_bins() as u64;
        if k > half {
            return None;
        }
        Some(if d < 0 { (half - k) as usize } else { (half + k) as usize })
    }

    /// Storage index of a real-valued delay in ps.
    #[inline]
    pub fn index_of_f64(&self, d: f64) -> Option<usize> {
        let ad = d.abs();
        if !(ad <= self.window as f64) {
            return None;
        }
        let bw = self.bin_width as f64;
        let k = ((ad + 0.5 * bw) / bw).floor() as u64;
        let half = self.half_bins() as u64;
        if k > half {
            return None;
        }
        Some(if d < 0.0 { (half - k) as usize } else { (half + k) as usize })
    }

    /// Real-valued delay range `[lo, hi)` (by magnitude) covered by bin `i`.
    pub fn bin_range_f64(&self, i: usize) -> (f64, f64) {
        let bw = self.bin_width as f64;
        let c = self.tau_ps(i) as f64;
        let w = self.window as f64;
        ((c - 0.5 * bw).max(-w), (c + 0.5 * bw).min(w))
    }

    /// Number of integer-ps delays that land in bin `i`.
    pub fn effective_width(&self, i: usize) -> u64 {
        let half = self.half_bins() as i64;
        let k = (i as i64 - half).unsigned_abs();
        let bw = self.bin_width;
        // smallest |d| belonging to bin k ≥ 1 is ceil((2k−1)·bw / 2)
        let first = |k: u64| -> u64 {
            if k == 0 {
                0
            } else {
                ((2 * k - 1) * bw).div_ceil(2)
            }
        };
        let lo = first(k);
        let hi = (first(k + 1) - 1).min(self.window);
        if hi < lo {
            return 0;
        }
        if k == 0 {
            2 * hi + 1
        } else {
            hi - lo + 1
        }
    }

    pub(crate) fn counts_mut(&mut self) -> &mut [u64] {
        &mut self.counts
    }

    /// Writes `tau_ps,counts,g2` CSV. `g2` must have one value per bin.
    pub fn write_csv<W: Write>(&self, out: W, g2: &[f64]) -> Result<()> {
        if g2.len() != self.counts.len() {
            return Err(Error::Validation(format!(
                "{} g2 values for {} bins",
                g2.len(),
                self.counts.len()
            )));
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["tau_ps", "counts", "g2"]).map_err(csv_err)?;
        for (i, (&c, g)) in self.counts.iter().zip(g2).enumerate() {
            w.write_record([self.tau_ps(i).to_string(), c.to_string(), g.to_string()])
                .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub(crate) fn same_geometry(&self, other: &Self) -> Result<()> {
        if self.bin_width != other.bin_width || self.window != other.window {
            return Err(Error::Validation(format!(
                "histogram geometry mismatch: ({} ps, ±{} ps) vs ({} ps, ±{} ps)",
                self.bin_width, self.window, other.bin_width, other.window
            )));
        }
        Ok(())
    }
}

fn check_sorted(name: &str, tags: &[u64]) -> Result<()> {
    if let Some(i) = tags.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Validation(format!(
            "stream {name} is not strictly increasing at index {}",
            i + 1
        )));
    }
    Ok(())
}

/// Adds every pair (a[i], b[j]) with |b[j] − a[i]| ≤ window into `hist`.
/// With `skip_self` the slices are the same stream and i == j is dropped.
fn sweep(hist: &mut CorrelationHistogram, a: &[u64], b: &[u64], skip_self: bool) {
    let window = hist.window;
    let mut lo = 0usize;
    for (i, &ta) in a.iter().enumerate() {
        let start = ta.saturating_sub(window);
        while lo < b.len() && b[lo] < start {
            lo += 1;
        }
        let mut j = lo;
        while j < b.len() && b[j] <= ta + window {
            if !(skip_self && i == j) {
                let d = b[j] as i64 - ta as i64;
                if let Some(k) = hist.index_of(d) {
                    hist.counts[k] += 1;
                }
            }
            j += 1;
        }
    }
}

/// Full multi-stop correlation over raw tag slices. Both slices must be
/// strictly increasing.
pub fn cross_correlate_slices(a: &[u64], b: &[u64], bin_width: u64, window: u64) -> Result<CorrelationHistogram> {
    check_sorted("a", a)?;
    check_sorted("b", b)?;
    let mut h = CorrelationHistogram::new(bin_width, window)?;
    sweep(&mut h, a, b, false);
    h.meta = HistogramMeta {
        count_a: a.len() as u64,
        count_b: b.len() as u64,
        duration: 0,
    };
    Ok(h)
}

/// Histogram of `t_b − t_a` over all ordered pairs within ±`window` ps.
pub fn cross_correlate(a: &TimeTagStream, b: &TimeTagStream, bin_width: u64, window: u64) -> Result<CorrelationHistogram> {
    let mut h = cross_correlate_slices(a.timestamps(), b.timestamps(), bin_width, window)?;
    h.meta.duration = a.duration().max(b.duration());
    Ok(h)
}

/// Correlation of a stream with itself, excluding each tag paired with itself.
pub fn auto_correlate(s: &TimeTagStream, bin_width: u64, window: u64) -> Result<CorrelationHistogram> {
    let mut h = CorrelationHistogram::new(bin_width, window)?;
    sweep(&mut h, s.timestamps(), s.timestamps(), true);
    h.meta = HistogramMeta {
        count_a: s.len() as u64,
        count_b: s.len() as u64,
        duration: s.duration(),
    };
    Ok(h)
}

/// [`cross_correlate`] with stream `a` split into `partitions` contiguous
/// chunks processed in parallel. Counts are integer sums, so the result does
/// not depend on the partition count.
pub fn cross_correlate_partitioned(
    a: &TimeTagStream,
    b: &TimeTagStream,
    bin_width: u64,
    window: u64,
    partitions: usize,
) -> Result<CorrelationHistogram> {
    let template = CorrelationHistogram::new(bin_width, window)?;
    let ta = a.timestamps();
    let tb = b.timestamps();
    let chunk = ta.len().div_ceil(partitions.max(1)).max(1);
    let partials: Vec<Vec<u64>> = ta
        .par_chunks(chunk)
        .map(|part| {
            let mut h = template.clone();
            let first = part[0].saturating_sub(window);
            let skip = tb.partition_point(|&t| t < first);
            sweep(&mut h, part, &tb[skip..], false);
            h.counts
        })
        .collect();
    let mut h = template;
    for p in partials {
        for (c, v) in h.counts.iter_mut().zip(p) {
            *c += v;
        }
    }
    h.meta = HistogramMeta {
        count_a: ta.len() as u64,
        count_b: tb.len() as u64,
        duration: a.duration().max(b.duration()),
    };
    Ok(h)
}

/// Correlation counting only pairs whose tags fall in the same acquisition
/// segment; `boundaries` are segment start times (ps), ascending. Pairs that
/// straddle a boundary are discarded.
pub fn cross_correlate_segmented(
    a: &TimeTagStream,
    b: &TimeTagStream,
    bin_width: u64,
    window: u64,
    boundaries: &[u64],
) -> Result<CorrelationHistogram> {
    if boundaries.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation("segment boundaries must be ascending".into()));
    }
    let mut h = CorrelationHistogram::new(bin_width, window)?;
    let (ta, tb) = (a.timestamps(), b.timestamps());
    let mut cuts = vec![0u64];
    cuts.extend(boundaries.iter().copied().filter(|&x| x > 0));
    for (i, &start) in cuts.iter().enumerate() {
        let end = cuts.get(i + 1).copied().unwrap_or(u64::MAX);
        let sa = &ta[ta.partition_point(|&t| t < start)..ta.partition_point(|&t| t < end)];
        let sb = &tb[tb.partition_point(|&t| t < start)..tb.partition_point(|&t| t < end)];
        sweep(&mut h, sa, sb, false);
    }
    h.meta = HistogramMeta {
        count_a: ta.len() as u64,
        count_b: tb.len() as u64,
        duration: a.duration().max(b.duration()),
    };
    Ok(h)
}

/// Sum of two histograms over disjoint acquisitions.
pub fn merge(h1: &CorrelationHistogram, h2: &CorrelationHistogram) -> Result<CorrelationHistogram> {
    h1.same_geometry(h2)?;
    let mut out = h1.clone();
    for (c, v) in out.counts.iter_mut().zip(&h2.counts) {
        *c += v;
    }
    out.meta = HistogramMeta {
        count_a: h1.meta.count_a + h2.meta.count_a,
        count_b: h1.meta.count_b + h2.meta.count_b,
        duration: h1.meta.duration + h2.meta.duration,
    };
    Ok(out)
}

/// g² per bin from the measured singles rates:
/// `counts / (rate_a · rate_b · width · duration)`.
pub fn normalize_to_g2(hist: &CorrelationHistogram) -> Result<Vec<f64>> {
    let m = hist.meta;
    if m.duration <= hist.window {
        return Err(Error::Validation(format!(
            "acquisition duration {} ps must exceed the window {} ps",
            m.duration, hist.window
        )));
    }
    if m.count_a == 0 || m.count_b == 0 {
        return Err(Error::Numerical("cannot normalize: a channel has zero rate".into()));
    }
    let scale = m.duration as f64 / (m.count_a as f64 * m.count_b as f64);
    Ok(hist
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let w = hist.effective_width(i);
            if w == 0 {
                0.0
            } else {
                c as f64 * scale / w as f64
            }
        })
        .collect())
}

/// g² per bin normalized to the mean count density of the outermost
/// `fraction` of bins on each side.
pub fn normalize_to_plateau(hist: &CorrelationHistogram, fraction: f64) -> Result<Vec<f64>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::domain("plateau_fraction", format!("must lie in (0, 1], got {fraction}")));
    }
    let half = hist.half_bins();
    let edge = ((half as f64) * fraction).ceil().max(1.0) as usize;
    let idx: Vec<usize> = (0..edge.min(half)).chain(hist.len() - edge.min(half)..hist.len()).collect();
    let (c, w): (u64, u64) = idx
        .iter()
        .fold((0, 0), |(c, w), &i| (c + hist.counts[i], w + hist.effective_width(i)));
    if c == 0 || w == 0 {
        return Err(Error::Numerical("plateau bins are empty".into()));
    }
    let density = c as f64 / w as f64;
    Ok(hist
        .counts
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let w = hist.effective_width(i);
            if w == 0 {
                0.0
            } else {
                n as f64 / (w as f64 * density)
            }
        })
        .collect())
}
