//! Summary statistics and equal-width histograms over descriptor values.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("no values to summarize")]
    EmptyInput,
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("invalid histogram range or bin count: {0}")]
    InvalidRange(String),
}

/// Location and spread of a value set, in the values' own unit.
///
/// Percentiles interpolate linearly between closest ranks; `std` is the
/// population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub std: f64,
}

impl SummaryStats {
    /// Values in table column order: min, max, mean, p25, median, p75, std.
    pub fn columns(&self) -> [f64; 7] {
        [self.min, self.max, self.mean, self.p25, self.median, self.p75, self.std]
    }

    pub fn from_columns(c: [f64; 7]) -> Self {
        Self {
            min: c[0],
            max: c[1],
            mean: c[2],
            p25: c[3],
            median: c[4],
            p75: c[5],
            std: c[6],
        }
    }
}

/// Percentile `q` in `[0, 1]` of already sorted data.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

pub fn summarize(values: &[f64]) -> Result<SummaryStats, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(*v));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);

    let n = sorted.len() as f64;
    // summed in sorted order so the result does not depend on input order
    let mean = sorted.iter().sum::<f64>() / n;
    let variance = sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;

    let p25 = percentile_sorted(&sorted, 0.25);
    let median = percentile_sorted(&sorted, 0.5);
    let p75 = percentile_sorted(&sorted, 0.75);
    let min = sorted[0];
    let max = sorted[sorted.len() - 1];
    Ok(SummaryStats {
        min,
        max,
        // rounding can push the mean a hair outside [min, max] for near-constant data
        mean: mean.clamp(min, max),
        p25,
        median: median.clamp(p25, p75),
        p75,
        std: variance.sqrt(),
    })
}

/// Equal-width histogram; the last bin is closed on the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
    /// Values that fell outside an explicitly requested range.
    #[serde(default)]
    pub out_of_range: u64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// `(lo, hi, count)` per bin.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, u64)> + '_ {
        self.bin_edges
            .windows(2)
            .zip(&self.counts)
            .map(|(e, c)| (e[0], e[1], *c))
    }
}

pub fn build_histogram(
    values: &[f64],
    bins: usize,
    range: Option<(f64, f64)>,
) -> Result<Histogram, StatsError> {
    if values.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    if bins == 0 {
        return Err(StatsError::InvalidRange("bin count must be >= 1".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite(*v));
    }

    let (lo, hi) = match range {
        Some((lo, hi)) => {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(StatsError::InvalidRange(format!("[{lo}, {hi}]")));
            }
            (lo, hi)
        }
        None => {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if hi > lo {
                (lo, hi)
            } else {
                let pad = 1e-9f64.max(lo.abs() * 1e-9);
                (lo - pad, hi + pad)
            }
        }
    };

    let width = hi - lo;
    let bin_edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 / bins as f64 })
        .collect();

    let mut counts = vec![0u64; bins];
    let mut out_of_range = 0;
    for &v in values {
        if v < lo || v > hi {
            out_of_range += 1;
            continue;
        }
        let mut idx = (((v - lo) / width) * bins as f64).floor() as usize;
        idx = idx.min(bins - 1);
        // keep the index consistent with the published edges despite rounding
        while idx > 0 && v < bin_edges[idx] {
            idx -= 1;
        }
        while idx + 1 < bins && v >= bin_edges[idx + 1] {
            idx += 1;
        }
        counts[idx] += 1;
    }

    Ok(Histogram {
        total: counts.iter().sum(),
        bin_edges,
        counts,
        out_of_range,
    })
}
