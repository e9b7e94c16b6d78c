//! Frame-level spectral and temporal descriptors for short audio recordings
//! (cough sounds, speech), pooled into per-group statistical summaries and
//! histograms.
//!
//! The pipeline is:
//!
//! ```text
//! WAV -> AudioClip (mono, [-1, 1], 22050 Hz) -> FrameMatrix (512 / 256, Hann)
//!     -> PowerSpectrum per frame -> seven descriptor series
//!     -> SummaryStats + Histogram per descriptor per group -> CSV / JSON
//! ```

pub mod cli;
pub mod features;
pub mod framing;
pub mod ingest;
pub mod reference;
pub mod report;
pub mod spectrum;
pub mod stats;
pub mod synth;

pub use features::{extract_all, Descriptor, FeatureConfig, FeatureSet, FeatureSeries, FluxNormalization};
pub use framing::{frame_signal, FrameMatrix, WindowKind};
pub use ingest::{decode_wav, resample, AudioClip, CANONICAL_RATE};
pub use report::{characterize_group, compare_groups, ComparisonReport, GroupOptions, GroupReport};
pub use spectrum::{power_spectrum, PowerSpectrum};
pub use stats::{build_histogram, summarize, Histogram, SummaryStats};
pub use synth::{synth, SynthKind, SynthSpec};
