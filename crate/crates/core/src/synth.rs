//! Deterministic synthetic test signals.
//!
//! Randomness comes from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64(seed)`. Each uniform draw takes the top 53 bits of one
//! `next_u64()` word as `u in [0, 1)` and maps it to `0.8 * (2u - 1)`, so a
//! port only needs a ChaCha8 stream to reproduce the samples.

use std::f64::consts::PI;
use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::framing::DEFAULT_FRAME_LENGTH;
use crate::ingest::{AudioClip, CANONICAL_RATE};

/// Peak amplitude of every generated signal.
pub const AMPLITUDE: f64 = 0.8;
/// Silence before a cough burst starts.
pub const COUGH_LEAD_IN_SECS: f64 = 0.02;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SynthKind {
    /// `0.8 sin(2 pi f n / sr)`.
    Sine,
    /// Seeded uniform noise in `[-0.8, 0.8]`.
    WhiteNoise,
    /// 20 ms of silence, then noise under an exponential decay envelope.
    CoughBurst,
    /// Harmonic series of a fundamental with `1/h` amplitudes and seeded phases.
    Vowel,
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthKind::Sine => "sine",
            SynthKind::WhiteNoise => "white_noise",
            SynthKind::CoughBurst => "cough_burst",
            SynthKind::Vowel => "vowel",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub kind: SynthKind,
    /// Sine frequency or vowel fundamental, in Hz.
    pub frequency: f64,
    pub duration: f64,
    pub seed: u64,
    /// Time constant of the cough envelope `exp(-t / decay)`, in seconds.
    pub decay: f64,
    pub harmonics: usize,
    pub sample_rate: u32,
}

impl SynthSpec {
    pub fn new(kind: SynthKind) -> Self {
        Self {
            kind,
            frequency: match kind {
                SynthKind::Vowel => 150.0,
                _ => 1000.0,
            },
            duration: 1.0,
            seed: 0,
            decay: 0.1,
            harmonics: 6,
            sample_rate: CANONICAL_RATE,
        }
    }

    pub fn sine(frequency: f64, duration: f64) -> Self {
        Self { frequency, duration, ..Self::new(SynthKind::Sine) }
    }

    pub fn white_noise(seed: u64, duration: f64) -> Self {
        Self { seed, duration, ..Self::new(SynthKind::WhiteNoise) }
    }

    pub fn cough_burst(seed: u64, duration: f64) -> Self {
        Self { seed, duration, ..Self::new(SynthKind::CoughBurst) }
    }

    pub fn vowel(fundamental: f64, seed: u64, duration: f64) -> Self {
        Self { frequency: fundamental, seed, duration, ..Self::new(SynthKind::Vowel) }
    }

    pub fn sample_count(&self) -> usize {
        (self.duration * self.sample_rate as f64).round() as usize
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidSpec(msg));
        if self.sample_rate == 0 {
            return bad("sample rate must be positive".into());
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration {} must be positive", self.duration));
        }
        if self.sample_count() < DEFAULT_FRAME_LENGTH {
            return bad(format!(
                "duration {} s is shorter than one {DEFAULT_FRAME_LENGTH}-sample frame",
                self.duration
            ));
        }
        let nyquist = self.sample_rate as f64 / 2.0;
        if matches!(self.kind, SynthKind::Sine | SynthKind::Vowel)
            && !(self.frequency > 0.0 && self.frequency < nyquist)
        {
            return bad(format!("frequency {} must be in (0, {nyquist})", self.frequency));
        }
        if self.kind == SynthKind::CoughBurst && !(self.decay.is_finite() && self.decay > 0.0) {
            return bad(format!("decay {} must be positive", self.decay));
        }
        if self.kind == SynthKind::Vowel && self.harmonics == 0 {
            return bad("vowel needs at least one harmonic".into());
        }
        Ok(())
    }
}

struct Uniform(ChaCha8Rng);

impl Uniform {
    fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// `[0, 1)` from the top 53 bits.
    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn symmetric(&mut self) -> f64 {
        AMPLITUDE * (2.0 * self.unit() - 1.0)
    }
}

pub fn synth(spec: &SynthSpec) -> Result<AudioClip, SynthError> {
    spec.validate()?;
    let n = spec.sample_count();
    let sr = spec.sample_rate as f64;

    let samples: Vec<f64> = match spec.kind {
        SynthKind::Sine => (0..n)
            .map(|i| AMPLITUDE * (2.0 * PI * spec.frequency * i as f64 / sr).sin())
            .collect(),
        SynthKind::WhiteNoise => {
            let mut rng = Uniform::new(spec.seed);
            (0..n).map(|_| rng.symmetric()).collect()
        }
        SynthKind::CoughBurst => {
            let mut rng = Uniform::new(spec.seed);
            let lead_in = (COUGH_LEAD_IN_SECS * sr).round() as usize;
            (0..n)
                .map(|i| {
                    if i < lead_in {
                        0.0
                    } else {
                        let t = (i - lead_in) as f64 / sr;
                        rng.symmetric() * (-t / spec.decay).exp()
                    }
                })
                .collect()
        }
        SynthKind::Vowel => {
            let mut rng = Uniform::new(spec.seed);
            let nyquist = sr / 2.0;
            let partials: Vec<(f64, f64, f64)> = (1..=spec.harmonics)
                .map(|h| (h as f64 * spec.frequency, 1.0 / h as f64, 2.0 * PI * rng.unit()))
                .filter(|(f, _, _)| *f < nyquist)
                .collect();
            let norm: f64 = partials.iter().map(|(_, a, _)| a).sum();
            (0..n)
                .map(|i| {
                    let t = i as f64 / sr;
                    let s: f64 = partials
                        .iter()
                        .map(|(f, a, phase)| a * (2.0 * PI * f * t + phase).sin())
                        .sum();
                    AMPLITUDE * s / norm
                })
                .collect()
        }
    };

    let clip = AudioClip::new(spec.sample_rate, samples, format!("synth:{}:{}", spec.kind, spec.seed))
        .map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
    Ok(clip)
}
