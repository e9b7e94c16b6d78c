//! WAV decoding and canonicalization to mono, full-scale-normalized 22050 Hz clips.

use std::fs::File;
use std::io::{self, BufReader, Read};
use std::path::Path;

use hound::{SampleFormat, WavReader};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sample rate every clip is brought to before analysis.
pub const CANONICAL_RATE: u32 = 22050;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed WAV file: {0}")]
    MalformedFile(String),
    #[error("unsupported WAV format: {0}")]
    UnsupportedFormat(String),
    #[error("audio contains no samples")]
    EmptyAudio,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A mono clip with samples in `[-1, 1]`.
///
/// Construction goes through [`AudioClip::new`], which checks the invariants,
/// so any `AudioClip` in hand is non-empty, finite, in range and has a
/// positive sample rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioClip {
    sample_rate: u32,
    samples: Vec<f64>,
    source_path: String,
    group_label: Option<String>,
}

impl AudioClip {
    pub fn new(
        sample_rate: u32,
        samples: Vec<f64>,
        source_path: impl Into<String>,
    ) -> Result<Self, IngestError> {
        if sample_rate == 0 {
            return Err(IngestError::InvalidArgument("sample rate must be positive".into()));
        }
        if samples.is_empty() {
            return Err(IngestError::EmptyAudio);
        }
        if let Some((i, s)) = samples
            .iter()
            .enumerate()
            .find(|(_, s)| !s.is_finite() || s.abs() > 1.0)
        {
            return Err(IngestError::InvalidArgument(format!(
                "sample {i} = {s} is outside [-1, 1]"
            )));
        }
        Ok(Self {
            sample_rate,
            samples,
            source_path: source_path.into(),
            group_label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.group_label = Some(label.into());
        self
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn source_path(&self) -> &str {
        &self.source_path
    }

    pub fn group_label(&self) -> Option<&str> {
        self.group_label.as_deref()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn is_canonical(&self) -> bool {
        self.sample_rate == CANONICAL_RATE
    }

    /// Returns a copy with every sample multiplied by `gain`, re-clamped to `[-1, 1]`.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .map(|s| (s * gain).clamp(-1.0, 1.0))
                .collect(),
            ..self.clone()
        }
    }
}

/// Decodes a RIFF/WAVE file (PCM16, PCM24 or float32; mono or stereo) at its native rate.
pub fn decode_wav(path: impl AsRef<Path>) -> Result<AudioClip, IngestError> {
    let path = path.as_ref();
    let file = File::open(path)?;
    decode_wav_reader(BufReader::new(file), path.display().to_string())
}

/// Same as [`decode_wav`] over any byte stream (used for stdin).
pub fn decode_wav_reader<R: Read>(
    reader: R,
    source: impl Into<String>,
) -> Result<AudioClip, IngestError> {
    let mut reader = WavReader::new(reader).map_err(map_hound)?;
    let spec = reader.spec();
    if spec.channels == 0 || spec.channels > 2 {
        return Err(IngestError::UnsupportedFormat(format!(
            "{} channels (only mono and stereo are supported)",
            spec.channels
        )));
    }

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(map_hound)?,
        (SampleFormat::Int, 24) => reader
            .samples::<i32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(map_hound)?,
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(map_hound)?,
        (format, bits) => {
            return Err(IngestError::UnsupportedFormat(format!(
                "{bits}-bit {format:?} samples"
            )))
        }
    };

    let full_scale = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => 32768.0,
        (SampleFormat::Int, 24) => 8_388_608.0,
        _ => 1.0,
    };

    let channels = usize::from(spec.channels);
    if interleaved.len() < channels {
        return Err(IngestError::EmptyAudio);
    }
    if !interleaved.len().is_multiple_of(channels) {
        return Err(IngestError::MalformedFile(
            "data chunk ends inside a sample frame".into(),
        ));
    }

    let samples = interleaved
        .chunks_exact(channels)
        .map(|frame| {
            let mean = frame.iter().sum::<f64>() / channels as f64;
            (mean / full_scale).clamp(-1.0, 1.0)
        })
        .collect();

    AudioClip::new(spec.sample_rate, samples, source)
}

fn map_hound(err: hound::Error) -> IngestError {
    match err {
        // the file itself is already open, so read failures here mean a short or broken stream
        hound::Error::IoError(e) => IngestError::MalformedFile(format!("truncated or unreadable data: {e}")),
        hound::Error::FormatError(msg) => IngestError::MalformedFile(msg.into()),
        hound::Error::Unsupported => {
            IngestError::UnsupportedFormat("compressed or unknown codec".into())
        }
        other => IngestError::MalformedFile(other.to_string()),
    }
}

/// Resamples `clip` to [`CANONICAL_RATE`].
pub fn canonicalize(clip: &AudioClip) -> Result<AudioClip, IngestError> {
    resample(clip, CANONICAL_RATE)
}

/// Zero crossings of the sinc kernel on each side of the centre, at the lower of the two rates.
const SINC_ZERO_CROSSINGS: usize = 32;
/// Passband edge as a fraction of the lower Nyquist frequency.
const CUTOFF_FRACTION: f64 = 0.94;
const KAISER_BETA: f64 = 8.6;
/// Above this many phases the kernel is evaluated on the fly instead of tabulated.
const MAX_TABULATED_PHASES: u64 = 4096;

/// Band-limited rational resampling with a Kaiser-windowed sinc kernel.
///
/// Output sample `m` sits at input position `m * in_rate / out_rate`; the
/// kernel is low-passed at the lower of the two Nyquist frequencies. Each
/// polyphase branch is normalized to unit DC gain. The result is clamped to
/// `[-1, 1]`.
pub fn resample(clip: &AudioClip, target_rate: u32) -> Result<AudioClip, IngestError> {
    if target_rate == 0 {
        return Err(IngestError::InvalidArgument("target rate must be positive".into()));
    }
    let source_rate = clip.sample_rate;
    if source_rate == target_rate {
        return Ok(clip.clone());
    }

    let g = gcd(u64::from(source_rate), u64::from(target_rate));
    let up = u64::from(target_rate) / g;
    let down = u64::from(source_rate) / g;

    let input = &clip.samples;
    let out_len = (input.len() as u64 * up).div_ceil(down).max(1) as usize;

    let cutoff = CUTOFF_FRACTION * (target_rate as f64 / source_rate as f64).min(1.0);
    let half_width = SINC_ZERO_CROSSINGS as f64 / cutoff;
    let reach = half_width.ceil() as i64;
    let kernel = Kernel { cutoff, half_width };

    let table = (up <= MAX_TABULATED_PHASES).then(|| {
        (0..up)
            .map(|phase| kernel.branch(phase as f64 / up as f64, reach))
            .collect::<Vec<_>>()
    });

    let n_in = input.len() as i64;
    let mut out = Vec::with_capacity(out_len);
    let mut scratch;
    for m in 0..out_len as u64 {
        let pos = m * down;
        let centre = (pos / up) as i64;
        let phase = pos % up;
        let taps: &[f64] = match &table {
            Some(t) => &t[phase as usize],
            None => {
                scratch = kernel.branch(phase as f64 / up as f64, reach);
                &scratch
            }
        };
        let mut acc = 0.0;
        for (offset, &h) in (-reach..=reach).zip(taps) {
            let j = centre + offset;
            if (0..n_in).contains(&j) {
                acc += input[j as usize] * h;
            }
        }
        out.push(acc.clamp(-1.0, 1.0));
    }

    Ok(AudioClip {
        sample_rate: target_rate,
        samples: out,
        source_path: clip.source_path.clone(),
        group_label: clip.group_label.clone(),
    })
}

struct Kernel {
    cutoff: f64,
    half_width: f64,
}

impl Kernel {
    fn eval(&self, x: f64) -> f64 {
        if x.abs() >= self.half_width {
            return 0.0;
        }
        let arg = std::f64::consts::PI * self.cutoff * x;
        let sinc = if arg.abs() < 1e-12 { 1.0 } else { arg.sin() / arg };
        let r = x / self.half_width;
        let window = bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / bessel_i0(KAISER_BETA);
        self.cutoff * sinc * window
    }

    /// Taps for input offsets `-reach..=reach` relative to the integer part of the
    /// output position, given the fractional part `frac`.
    fn branch(&self, frac: f64, reach: i64) -> Vec<f64> {
        let mut taps: Vec<f64> = (-reach..=reach)
            .map(|offset| self.eval(frac - offset as f64))
            .collect();
        let gain: f64 = taps.iter().sum();
        if gain != 0.0 {
            taps.iter_mut().for_each(|t| *t /= gain);
        }
        taps
    }
}

fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..64 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use hound::{WavSpec, WavWriter};
    use std::io::Cursor;

    fn wav_bytes<S: hound::Sample + Copy>(spec: WavSpec, samples: &[S]) -> Vec<u8> {
        let mut cursor = Cursor::new(Vec::new());
        {
            let mut w = WavWriter::new(&mut cursor, spec).unwrap();
            for &s in samples {
                w.write_sample(s).unwrap();
            }
            w.finalize().unwrap();
        }
        cursor.into_inner()
    }

    fn pcm16(channels: u16) -> WavSpec {
        WavSpec {
            channels,
            sample_rate: 22050,
            bits_per_sample: 16,
            sample_format: SampleFormat::Int,
        }
    }

    #[test]
    fn pcm16_full_scale() {
        let bytes = wav_bytes(pcm16(1), &[32767i16, -32768, 0]);
        let clip = decode_wav_reader(Cursor::new(bytes), "mem").unwrap();
        assert_eq!(clip.samples(), &[32767.0 / 32768.0, -1.0, 0.0]);
        assert_eq!(clip.sample_rate(), 22050);
    }

    #[test]
    fn stereo_is_channel_mean() {
        let bytes = wav_bytes(pcm16(2), &[16384i16, -16384, 8192, 8192]);
        let clip = decode_wav_reader(Cursor::new(bytes), "mem").unwrap();
        assert_eq!(clip.samples(), &[0.0, 0.25]);
    }

    #[test]
    fn pcm24_and_float() {
        let spec = WavSpec {
            bits_per_sample: 24,
            ..pcm16(1)
        };
        let bytes = wav_bytes(spec, &[4_194_304i32, -8_388_608]);
        let clip = decode_wav_reader(Cursor::new(bytes), "mem").unwrap();
        assert_eq!(clip.samples(), &[0.5, -1.0]);

        let spec = WavSpec {
            bits_per_sample: 32,
            sample_format: SampleFormat::Float,
            ..pcm16(1)
        };
        let bytes = wav_bytes(spec, &[0.25f32, -0.75, 1.5]);
        let clip = decode_wav_reader(Cursor::new(bytes), "mem").unwrap();
        assert_eq!(clip.samples(), &[0.25, -0.75, 1.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let err = decode_wav_reader(Cursor::new(b"not a wav file at all".to_vec()), "mem");
        assert!(matches!(err, Err(IngestError::MalformedFile(_))), "{err:?}");

        let bytes = wav_bytes(pcm16(1), &[] as &[i16]);
        let err = decode_wav_reader(Cursor::new(bytes), "mem");
        assert!(matches!(err, Err(IngestError::EmptyAudio)), "{err:?}");

        let bytes = wav_bytes(pcm16(3), &[1i16, 2, 3]);
        let err = decode_wav_reader(Cursor::new(bytes), "mem");
        assert!(matches!(err, Err(IngestError::UnsupportedFormat(_))), "{err:?}");

        let spec = WavSpec {
            bits_per_sample: 8,
            ..pcm16(1)
        };
        let bytes = wav_bytes(spec, &[1i8, 2, 3]);
        let err = decode_wav_reader(Cursor::new(bytes), "mem");
        assert!(matches!(err, Err(IngestError::UnsupportedFormat(_))), "{err:?}");
    }

    #[test]
    fn truncated_data_chunk_is_malformed() {
        let mut bytes = wav_bytes(pcm16(1), &[1i16; 100]);
        bytes.truncate(bytes.len() - 51);
        let err = decode_wav_reader(Cursor::new(bytes), "mem");
        assert!(matches!(err, Err(IngestError::MalformedFile(_))), "{err:?}");
    }

    #[test]
    fn compressed_codec_is_unsupported() {
        // Minimal RIFF with format tag 0x0055 (MPEG layer 3).
        let mut b = Vec::new();
        b.extend_from_slice(b"RIFF");
        b.extend_from_slice(&36u32.to_le_bytes());
        b.extend_from_slice(b"WAVEfmt ");
        b.extend_from_slice(&16u32.to_le_bytes());
        b.extend_from_slice(&0x0055u16.to_le_bytes());
        b.extend_from_slice(&1u16.to_le_bytes());
        b.extend_from_slice(&22050u32.to_le_bytes());
        b.extend_from_slice(&44100u32.to_le_bytes());
        b.extend_from_slice(&2u16.to_le_bytes());
        b.extend_from_slice(&16u16.to_le_bytes());
        b.extend_from_slice(b"data");
        b.extend_from_slice(&0u32.to_le_bytes());
        let err = decode_wav_reader(Cursor::new(b), "mem");
        assert!(matches!(err, Err(IngestError::UnsupportedFormat(_))), "{err:?}");
    }

    #[test]
    fn clip_invariants_checked() {
        assert!(AudioClip::new(22050, vec![], "x").is_err());
        assert!(AudioClip::new(22050, vec![1.5], "x").is_err());
        assert!(AudioClip::new(22050, vec![f64::NAN], "x").is_err());
        assert!(AudioClip::new(0, vec![0.0], "x").is_err());
        assert!(AudioClip::new(22050, vec![-1.0, 1.0], "x").is_ok());
    }

    #[test]
    fn resample_identity_and_halving() {
        let clip = AudioClip::new(22050, vec![0.1, -0.2, 0.3], "x").unwrap();
        assert_eq!(resample(&clip, 22050).unwrap(), clip);

        let clip = AudioClip::new(44100, vec![0.0; 44100], "x").unwrap();
        let out = resample(&clip, 22050).unwrap();
        assert_eq!(out.sample_rate(), 22050);
        assert!((out.len() as i64 - 22050).abs() <= 1);
        assert!(resample(&clip, 0).is_err());
    }

    #[test]
    fn resample_preserves_duration_for_awkward_ratios() {
        for (from, len) in [(48000u32, 4800usize), (8000, 1234), (44101, 5000), (16000, 1)] {
            let clip = AudioClip::new(from, vec![0.1; len], "x").unwrap();
            let out = resample(&clip, 22050).unwrap();
            let expected = len as f64 * 22050.0 / from as f64;
            assert!((out.len() as f64 - expected).abs() <= 1.0, "{from}: {} vs {expected}", out.len());
        }
    }

    #[test]
    fn resample_keeps_dc_level() {
        let clip = AudioClip::new(44100, vec![0.5; 8820], "x").unwrap();
        let out = resample(&clip, 22050).unwrap();
        // away from the zero-padded edges the branch normalization gives exact DC
        for s in &out.samples()[200..out.len() - 200] {
            assert!((s - 0.5).abs() < 1e-9);
        }
    }
}
