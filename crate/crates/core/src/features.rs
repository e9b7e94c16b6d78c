//! The seven per-frame descriptors and the clip-level extraction pipeline.
//!
//! Spectral descriptors other than flux are computed on the power spectrum
//! (`|X(k)|^2`). Flux uses magnitudes normalized to unit sum. Zero-crossing
//! rate runs on the unwindowed frame.
//!
//! Frames whose windowed spectrum has zero total power are *silent*: the
//! single-frame functions return [`FeatureError::SilentFrame`], and
//! [`extract_all`] substitutes 0 for every spectral descriptor, uses a uniform
//! distribution for flux, and flags the frame in [`FeatureSet::silent`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::framing::{frame_signal, FrameMatrix, FramingError, WindowKind, DEFAULT_FRAME_LENGTH, DEFAULT_HOP};
use crate::ingest::AudioClip;
use crate::spectrum::{PowerSpectrum, SpectrumAnalyzer, SpectrumError};

#[derive(Debug, Error, PartialEq)]
pub enum FeatureError {
    #[error("frame has zero total power")]
    SilentFrame,
    #[error("spectral flux needs at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("invalid feature configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Framing(#[from] FramingError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Descriptor {
    Rolloff,
    Entropy,
    Flatness,
    Flux,
    Zcr,
    Centroid,
    Bandwidth,
}

impl Descriptor {
    /// Table row order.
    pub const ALL: [Descriptor; 7] = [
        Descriptor::Rolloff,
        Descriptor::Entropy,
        Descriptor::Flatness,
        Descriptor::Flux,
        Descriptor::Zcr,
        Descriptor::Centroid,
        Descriptor::Bandwidth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Descriptor::Rolloff => "rolloff",
            Descriptor::Entropy => "entropy",
            Descriptor::Flatness => "flatness",
            Descriptor::Flux => "flux",
            Descriptor::Zcr => "zcr",
            Descriptor::Centroid => "centroid",
            Descriptor::Bandwidth => "bandwidth",
        }
    }

    /// Human-readable row label used in printed tables.
    pub fn title(self) -> &'static str {
        match self {
            Descriptor::Rolloff => "Spectral Roll-off (in Hz)",
            Descriptor::Entropy => "Spectral Entropy",
            Descriptor::Flatness => "Spectral Flatness",
            Descriptor::Flux => "Spectral Flux",
            Descriptor::Zcr => "Zero Crossing Rate",
            Descriptor::Centroid => "Spectral Centroid (Hz)",
            Descriptor::Bandwidth => "Spectral Bandwidth (Hz)",
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            Descriptor::Rolloff | Descriptor::Centroid | Descriptor::Bandwidth => "Hz",
            _ => "",
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Descriptor {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Descriptor::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown descriptor `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxNormalization {
    /// Min-max map each clip's flux series onto `[0, 1]`.
    #[default]
    RecordMinMax,
    /// Min-max map the pooled flux values of a whole group (applied by the report layer).
    GroupMinMax,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub frame_length: usize,
    pub hop: usize,
    pub window: WindowKind,
    pub roll_percent: f64,
    /// ZCR threshold as a fraction of the frame's peak absolute sample.
    pub zcr_epsilon_rel: f64,
    /// Lower clamp on power bins inside the flatness geometric mean, as a
    /// fraction of the frame's largest bin.
    pub flatness_floor: f64,
    pub entropy_normalized: bool,
    pub flux_normalization: FluxNormalization,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            frame_length: DEFAULT_FRAME_LENGTH,
            hop: DEFAULT_HOP,
            window: WindowKind::Hann,
            roll_percent: 0.85,
            zcr_epsilon_rel: 1e-4,
            flatness_floor: 1e-12,
            entropy_normalized: true,
            flux_normalization: FluxNormalization::RecordMinMax,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<(), FeatureError> {
        let bad = |msg: String| Err(FeatureError::InvalidConfig(msg));
        if !(self.roll_percent > 0.0 && self.roll_percent <= 1.0) {
            return bad(format!("roll_percent {} not in (0, 1]", self.roll_percent));
        }
        if !(self.zcr_epsilon_rel > 0.0 && self.zcr_epsilon_rel.is_finite()) {
            return bad(format!("zcr_epsilon_rel {} must be > 0", self.zcr_epsilon_rel));
        }
        if !(self.flatness_floor > 0.0 && self.flatness_floor.is_finite()) {
            return bad(format!("flatness_floor {} must be > 0", self.flatness_floor));
        }
        if self.frame_length < 2 || !self.frame_length.is_power_of_two() {
            return bad(format!("frame_length {} must be a power of two", self.frame_length));
        }
        if self.hop == 0 || self.hop > self.frame_length {
            return bad(format!("hop {} must be in 1..={}", self.hop, self.frame_length));
        }
        Ok(())
    }
}

fn require_power(spec: &PowerSpectrum) -> Result<f64, FeatureError> {
    let total = spec.total_power();
    if total > 0.0 {
        Ok(total)
    } else {
        Err(FeatureError::SilentFrame)
    }
}

/// Frequency of the lowest bin at which the cumulative power, summed from DC,
/// reaches `roll_percent` of the total.
pub fn spectral_rolloff(spec: &PowerSpectrum, roll_percent: f64) -> Result<f64, FeatureError> {
    let total = require_power(spec)?;
    let threshold = roll_percent * total;
    let mut cumulative = 0.0;
    for (p, f) in spec.power().iter().zip(spec.bin_freq()) {
        cumulative += p;
        if cumulative >= threshold {
            return Ok(*f);
        }
    }
    Ok(*spec.bin_freq().last().expect("spectrum has bins"))
}

/// Shannon entropy (bits) of the power distribution over bins, optionally
/// divided by `log2(bin_count)`.
pub fn spectral_entropy(spec: &PowerSpectrum, normalized: bool) -> Result<f64, FeatureError> {
    let total = require_power(spec)?;
    let h: f64 = spec
        .power()
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| {
            let q = p / total;
            -q * q.log2()
        })
        .sum();
    let h = h.max(0.0);
    if normalized {
        Ok((h / (spec.bin_count() as f64).log2()).min(1.0))
    } else {
        Ok(h)
    }
}

/// Geometric over arithmetic mean of the power bins.
///
/// Inside the geometric mean each bin is clamped below by `floor` times the
/// largest bin, which keeps `log 0` out and leaves the ratio independent of
/// signal level.
pub fn spectral_flatness(spec: &PowerSpectrum, floor: f64) -> Result<f64, FeatureError> {
    let n = spec.bin_count() as f64;
    let arithmetic = spec.total_power() / n;
    if arithmetic <= 0.0 {
        return Err(FeatureError::SilentFrame);
    }
    let peak = spec.power().iter().fold(0.0f64, |m, p| m.max(*p));
    let clamp = floor * peak;
    let mean_log = spec.power().iter().map(|p| p.max(clamp).ln()).sum::<f64>() / n;
    Ok((mean_log.exp() / arithmetic).min(1.0))
}

/// Magnitudes scaled to unit sum; uniform for a silent spectrum.
pub fn normalized_magnitudes(spec: &PowerSpectrum) -> Vec<f64> {
    let total: f64 = spec.magnitude().iter().sum();
    let bins = spec.bin_count();
    if total > 0.0 {
        spec.magnitude().iter().map(|m| m / total).collect()
    } else {
        vec![1.0 / bins as f64; bins]
    }
}

/// Sum of squared differences of unit-sum magnitude spectra; in `[0, 2]`.
pub fn flux_between(previous: &PowerSpectrum, current: &PowerSpectrum) -> f64 {
    let a = normalized_magnitudes(previous);
    let b = normalized_magnitudes(current);
    a.iter().zip(&b).map(|(x, y)| (y - x) * (y - x)).sum()
}

fn flux_from_spectra(spectra: &[PowerSpectrum]) -> Vec<f64> {
    let dists: Vec<Vec<f64>> = spectra.iter().map(normalized_magnitudes).collect();
    dists
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(x, y)| (y - x) * (y - x)).sum())
        .collect()
}

/// Raw flux for every consecutive frame pair of `frames` (length `frames.len() - 1`).
pub fn spectral_flux(frames: &FrameMatrix) -> Result<Vec<f64>, FeatureError> {
    if frames.len() < 2 {
        return Err(FeatureError::TooFewFrames(frames.len()));
    }
    let analyzer = SpectrumAnalyzer::new(frames.frame_length(), frames.sample_rate())?;
    let spectra = frames
        .windowed()
        .iter()
        .map(|f| analyzer.analyze(f))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(flux_from_spectra(&spectra))
}

/// Affinely maps `values` so the minimum becomes 0 and the maximum 1.
/// A constant series maps to all zeros.
pub fn minmax_normalize(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let span = hi - lo;
    values
        .iter()
        .map(|v| if span > 0.0 { (v - lo) / span } else { 0.0 })
        .collect()
}

/// Sign changes per sample on an unwindowed frame.
///
/// Samples with `|s| <= epsilon_rel * max|s|` carry no sign; a crossing is
/// counted whenever a sample above the threshold has the opposite sign to the
/// previous above-threshold sample. The count is divided by the frame length,
/// so the result lies in `[0, (N - 1) / N]`.
pub fn zero_crossing_rate(raw_frame: &[f64], epsilon_rel: f64) -> f64 {
    if raw_frame.is_empty() {
        return 0.0;
    }
    let peak = raw_frame.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let epsilon = epsilon_rel * peak;
    let mut last_positive = None;
    let mut crossings = 0usize;
    for &s in raw_frame {
        if s.abs() > epsilon {
            let positive = s > 0.0;
            if last_positive.is_some_and(|p| p != positive) {
                crossings += 1;
            }
            last_positive = Some(positive);
        }
    }
    crossings as f64 / raw_frame.len() as f64
}

/// Power-weighted mean bin frequency.
pub fn spectral_centroid(spec: &PowerSpectrum) -> Result<f64, FeatureError> {
    let total = require_power(spec)?;
    let weighted: f64 = spec.power().iter().zip(spec.bin_freq()).map(|(p, f)| p * f).sum();
    Ok(weighted / total)
}

/// Power-weighted mean absolute deviation of bin frequency about `centroid`.
pub fn spectral_bandwidth(spec: &PowerSpectrum, centroid: f64) -> Result<f64, FeatureError> {
    let total = require_power(spec)?;
    let spread: f64 = spec
        .power()
        .iter()
        .zip(spec.bin_freq())
        .map(|(p, f)| (f - centroid).abs() * p)
        .sum();
    Ok(spread / total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSeries {
    pub descriptor: Descriptor,
    pub values: Vec<f64>,
}

/// All descriptor series for one clip.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub source: String,
    pub frame_count: usize,
    /// Start time of each frame in seconds.
    pub frame_times: Vec<f64>,
    /// `true` where the windowed frame had zero total power.
    pub silent: Vec<bool>,
    pub series: BTreeMap<Descriptor, FeatureSeries>,
    /// Flux before any normalization.
    pub flux_raw: Vec<f64>,
}

impl FeatureSet {
    pub fn values(&self, descriptor: Descriptor) -> &[f64] {
        &self.series[&descriptor].values
    }

    /// Values of `descriptor`, dropping silent frames (for flux: pairs touching a silent frame).
    pub fn values_excluding_silent(&self, descriptor: Descriptor) -> Vec<f64> {
        let values = self.values(descriptor);
        if descriptor == Descriptor::Flux {
            values
                .iter()
                .enumerate()
                .filter(|(i, _)| !self.silent[*i] && !self.silent[*i + 1])
                .map(|(_, v)| *v)
                .collect()
        } else {
            values
                .iter()
                .zip(&self.silent)
                .filter(|(_, s)| !**s)
                .map(|(v, _)| *v)
                .collect()
        }
    }
}

struct FrameDescriptors {
    rolloff: f64,
    entropy: f64,
    flatness: f64,
    centroid: f64,
    bandwidth: f64,
}

fn describe_frame(spec: &PowerSpectrum, config: &FeatureConfig) -> Result<FrameDescriptors, FeatureError> {
    let centroid = spectral_centroid(spec)?;
    Ok(FrameDescriptors {
        rolloff: spectral_rolloff(spec, config.roll_percent)?,
        entropy: spectral_entropy(spec, config.entropy_normalized)?,
        flatness: spectral_flatness(spec, config.flatness_floor)?,
        centroid,
        bandwidth: spectral_bandwidth(spec, centroid)?,
    })
}

/// Frames the clip and computes every descriptor.
///
/// Series have one value per frame, except flux which has one per
/// consecutive pair (empty for a single-frame clip).
pub fn extract_all(clip: &AudioClip, config: &FeatureConfig) -> Result<FeatureSet, FeatureError> {
    config.validate()?;
    let frames = frame_signal(clip, config.frame_length, config.hop, config.window)?;
    let analyzer = SpectrumAnalyzer::new(config.frame_length, clip.sample_rate())?;
    let spectra = frames
        .windowed()
        .iter()
        .map(|f| analyzer.analyze(f))
        .collect::<Result<Vec<_>, _>>()?;

    let n = frames.len();
    let mut columns: BTreeMap<Descriptor, Vec<f64>> =
        Descriptor::ALL.iter().map(|d| (*d, Vec::with_capacity(n))).collect();
    let mut silent = Vec::with_capacity(n);

    for (spec, raw) in spectra.iter().zip(frames.raw()) {
        let frame = match describe_frame(spec, config) {
            Ok(d) => {
                silent.push(false);
                d
            }
            Err(FeatureError::SilentFrame) => {
                silent.push(true);
                FrameDescriptors {
                    rolloff: 0.0,
                    entropy: 0.0,
                    flatness: 0.0,
                    centroid: 0.0,
                    bandwidth: 0.0,
                }
            }
            Err(e) => return Err(e),
        };
        let push = |cols: &mut BTreeMap<Descriptor, Vec<f64>>, d, v| {
            cols.get_mut(&d).expect("all descriptors present").push(v)
        };
        push(&mut columns, Descriptor::Rolloff, frame.rolloff);
        push(&mut columns, Descriptor::Entropy, frame.entropy);
        push(&mut columns, Descriptor::Flatness, frame.flatness);
        push(&mut columns, Descriptor::Zcr, zero_crossing_rate(raw, config.zcr_epsilon_rel));
        push(&mut columns, Descriptor::Centroid, frame.centroid);
        push(&mut columns, Descriptor::Bandwidth, frame.bandwidth);
    }

    let flux_raw = flux_from_spectra(&spectra);
    let flux = match config.flux_normalization {
        FluxNormalization::RecordMinMax => minmax_normalize(&flux_raw),
        FluxNormalization::GroupMinMax | FluxNormalization::Raw => flux_raw.clone(),
    };
    columns.insert(Descriptor::Flux, flux);

    let series = columns
        .into_iter()
        .map(|(descriptor, values)| (descriptor, FeatureSeries { descriptor, values }))
        .collect();

    Ok(FeatureSet {
        source: clip.source_path().to_string(),
        frame_count: n,
        frame_times: (0..n).map(|i| frames.frame_time(i)).collect(),
        silent,
        series,
        flux_raw,
    })
}
