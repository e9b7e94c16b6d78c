//! Overlapping, windowed analysis frames.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::AudioClip;

pub const DEFAULT_FRAME_LENGTH: usize = 512;
pub const DEFAULT_HOP: usize = 256;

#[derive(Debug, Error, PartialEq)]
pub enum FramingError {
    #[error("clip has {samples} samples, fewer than the frame length {frame_length}")]
    ClipTooShort { samples: usize, frame_length: usize },
    #[error("invalid framing parameters: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    /// Periodic Hann, `0.5 - 0.5 cos(2 pi n / N)`.
    #[default]
    Hann,
    Rectangular,
}

impl WindowKind {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        match self {
            WindowKind::Hann => (0..len)
                .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
                .collect(),
            WindowKind::Rectangular => vec![1.0; len],
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowKind::Hann => "hann",
            WindowKind::Rectangular => "rectangular",
        })
    }
}

impl FromStr for WindowKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hann" => Ok(WindowKind::Hann),
            "rectangular" | "rect" => Ok(WindowKind::Rectangular),
            other => Err(format!("unknown window kind `{other}`")),
        }
    }
}

/// Frames of a clip, both raw and windowed.
///
/// Frame `i` covers samples `[i * hop, i * hop + frame_length)`; a trailing
/// partial frame is dropped and there is no centre padding.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix {
    frame_length: usize,
    hop: usize,
    sample_rate: u32,
    window_kind: WindowKind,
    raw: Vec<Vec<f64>>,
    windowed: Vec<Vec<f64>>,
}

impl FrameMatrix {
    pub fn frame_length(&self) -> usize {
        self.frame_length
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn window_kind(&self) -> WindowKind {
        self.window_kind
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    /// Unwindowed frames (used by ZCR).
    pub fn raw(&self) -> &[Vec<f64>] {
        &self.raw
    }

    pub fn windowed(&self) -> &[Vec<f64>] {
        &self.windowed
    }

    /// Start time of frame `i` in seconds.
    pub fn frame_time(&self, i: usize) -> f64 {
        (i * self.hop) as f64 / self.sample_rate as f64
    }
}

/// `floor((num_samples - frame_length) / hop) + 1`, or 0 if the clip is shorter than a frame.
pub fn frame_count(num_samples: usize, frame_length: usize, hop: usize) -> usize {
    if num_samples < frame_length || hop == 0 {
        0
    } else {
        (num_samples - frame_length) / hop + 1
    }
}

pub fn frame_signal(
    clip: &AudioClip,
    frame_length: usize,
    hop: usize,
    window_kind: WindowKind,
) -> Result<FrameMatrix, FramingError> {
    if frame_length < 2 {
        return Err(FramingError::InvalidArgument(format!(
            "frame length {frame_length} < 2"
        )));
    }
    if hop == 0 || hop > frame_length {
        return Err(FramingError::InvalidArgument(format!(
            "hop {hop} must be in 1..={frame_length}"
        )));
    }
    let samples = clip.samples();
    if samples.len() < frame_length {
        return Err(FramingError::ClipTooShort {
            samples: samples.len(),
            frame_length,
        });
    }

    let window = window_kind.coefficients(frame_length);
    let count = frame_count(samples.len(), frame_length, hop);
    let raw: Vec<Vec<f64>> = (0..count)
        .map(|i| samples[i * hop..i * hop + frame_length].to_vec())
        .collect();
    let windowed = raw
        .iter()
        .map(|frame| frame.iter().zip(&window).map(|(s, w)| s * w).collect())
        .collect();

    Ok(FrameMatrix {
        frame_length,
        hop,
        sample_rate: clip.sample_rate(),
        window_kind,
        raw,
        windowed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(len: usize) -> AudioClip {
        let samples = (0..len).map(|i| ((i % 200) as f64 / 100.0) - 1.0).collect();
        AudioClip::new(22050, samples, "ramp").unwrap()
    }

    #[test]
    fn paper_setup_counts() {
        assert_eq!(frame_signal(&ramp(22050), 512, 256, WindowKind::Hann).unwrap().len(), 85);
        assert_eq!(frame_signal(&ramp(512), 512, 256, WindowKind::Hann).unwrap().len(), 1);
        // 110 ms at 22050 Hz
        assert_eq!(frame_signal(&ramp(2425), 512, 256, WindowKind::Hann).unwrap().len(), 8);
    }

    #[test]
    fn short_clip_rejected() {
        let err = frame_signal(&ramp(511), 512, 256, WindowKind::Hann).unwrap_err();
        assert_eq!(
            err,
            FramingError::ClipTooShort {
                samples: 511,
                frame_length: 512
            }
        );
        assert!(frame_signal(&ramp(600), 1, 1, WindowKind::Hann).is_err());
        assert!(frame_signal(&ramp(600), 512, 0, WindowKind::Hann).is_err());
        assert!(frame_signal(&ramp(600), 512, 513, WindowKind::Hann).is_err());
    }

    #[test]
    fn windowed_entries_are_exact_products() {
        let clip = ramp(3000);
        let fm = frame_signal(&clip, 512, 256, WindowKind::Hann).unwrap();
        let w = WindowKind::Hann.coefficients(512);
        for (i, frame) in fm.windowed().iter().enumerate() {
            assert_eq!(frame.len(), 512);
            for (n, v) in frame.iter().enumerate() {
                assert_eq!(*v, w[n] * clip.samples()[i * 256 + n]);
            }
        }
        let rect = frame_signal(&clip, 512, 256, WindowKind::Rectangular).unwrap();
        assert_eq!(rect.raw(), fm.raw());
        assert_eq!(rect.windowed(), rect.raw());
    }

    #[test]
    fn hann_shape() {
        let w = WindowKind::Hann.coefficients(512);
        assert_eq!(w[0], 0.0);
        assert!((w[256] - 1.0).abs() < 1e-15);
        assert!((w[1] - w[511]).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn frame_count_matches_naive_loop(len in 512usize..20_000, hop in 1usize..=512) {
            let mut naive = 0;
            let mut start = 0;
            while start + 512 <= len {
                naive += 1;
                start += hop;
            }
            prop_assert_eq!(frame_count(len, 512, hop), naive);
        }
    }
}
