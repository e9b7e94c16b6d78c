//! One-sided magnitude and power spectra of windowed frames.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpectrumError {
    #[error("frame length {0} is not a power of two >= 2")]
    InvalidFrameLength(usize),
    #[error("sample rate must be positive")]
    InvalidSampleRate,
}

/// Unnormalized DFT bins `0..=N/2` of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSpectrum {
    frame_length: usize,
    sample_rate: u32,
    magnitude: Vec<f64>,
    power: Vec<f64>,
    bin_freq: Vec<f64>,
}

impl PowerSpectrum {
    /// Builds a spectrum from precomputed power values, e.g. for test fixtures.
    ///
    /// `frame_length` is inferred as `2 * (bins - 1)`; magnitude is `sqrt(power)`.
    pub fn from_power(power: Vec<f64>, sample_rate: u32) -> Self {
        assert!(power.len() >= 2, "need at least DC and Nyquist bins");
        assert!(power.iter().all(|p| *p >= 0.0), "power must be non-negative");
        let frame_length = 2 * (power.len() - 1);
        let magnitude = power.iter().map(|p| p.sqrt()).collect();
        let bin_freq = bin_frequencies(power.len(), frame_length, sample_rate);
        Self {
            frame_length,
            sample_rate,
            magnitude,
            power,
            bin_freq,
        }
    }

    pub fn frame_length(&self) -> usize {
        self.frame_length
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn bin_count(&self) -> usize {
        self.power.len()
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn magnitude(&self) -> &[f64] {
        &self.magnitude
    }

    /// `f(k) = k * sample_rate / frame_length`.
    pub fn bin_freq(&self) -> &[f64] {
        &self.bin_freq
    }

    pub fn nyquist(&self) -> f64 {
        self.sample_rate as f64 / 2.0
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }

    pub fn is_silent(&self) -> bool {
        self.total_power() == 0.0
    }
}

fn bin_frequencies(bins: usize, frame_length: usize, sample_rate: u32) -> Vec<f64> {
    (0..bins)
        .map(|k| k as f64 * sample_rate as f64 / frame_length as f64)
        .collect()
}

/// Holds an FFT plan for one frame length so repeated frames reuse it.
pub struct SpectrumAnalyzer {
    frame_length: usize,
    sample_rate: u32,
    fft: Arc<dyn Fft<f64>>,
    bin_freq: Vec<f64>,
}

impl SpectrumAnalyzer {
    pub fn new(frame_length: usize, sample_rate: u32) -> Result<Self, SpectrumError> {
        if frame_length < 2 || !frame_length.is_power_of_two() {
            return Err(SpectrumError::InvalidFrameLength(frame_length));
        }
        if sample_rate == 0 {
            return Err(SpectrumError::InvalidSampleRate);
        }
        let fft = FftPlanner::new().plan_fft_forward(frame_length);
        Ok(Self {
            frame_length,
            sample_rate,
            fft,
            bin_freq: bin_frequencies(frame_length / 2 + 1, frame_length, sample_rate),
        })
    }

    pub fn analyze(&self, frame: &[f64]) -> Result<PowerSpectrum, SpectrumError> {
        if frame.len() != self.frame_length {
            return Err(SpectrumError::InvalidFrameLength(frame.len()));
        }
        let mut buf: Vec<Complex<f64>> = frame.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.fft.process(&mut buf);
        buf.truncate(self.frame_length / 2 + 1);

        let power: Vec<f64> = buf.iter().map(|c| c.norm_sqr()).collect();
        let magnitude = buf.iter().map(|c| c.norm()).collect();
        Ok(PowerSpectrum {
            frame_length: self.frame_length,
            sample_rate: self.sample_rate,
            magnitude,
            power,
            bin_freq: self.bin_freq.clone(),
        })
    }
}

/// One-off spectrum of a single frame; prefer [`SpectrumAnalyzer`] for many frames.
pub fn power_spectrum(frame: &[f64], sample_rate: u32) -> Result<PowerSpectrum, SpectrumError> {
    SpectrumAnalyzer::new(frame.len(), sample_rate)?.analyze(frame)
}
