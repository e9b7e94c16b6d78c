//! `coughscope` command line: `analyze`, `compare` and `synth`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error or no usable input.

use std::ffi::OsString;
use std::io::{self, Cursor, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::features::{FeatureConfig, FluxNormalization};
use crate::framing::{DEFAULT_FRAME_LENGTH, DEFAULT_HOP};
use crate::ingest::{canonicalize, decode_wav, decode_wav_reader, AudioClip, IngestError};
use crate::report::{
    analyze_group, compare_groups, export_comparison, export_group, export_series, format_orderings,
    format_stats_table, read_group_report, ExportFormat, GroupAnalysis, GroupOptions, GroupReport,
    Pooling, ReportError,
};
use crate::stats::DEFAULT_HISTOGRAM_BINS;
use crate::synth::{synth, SynthKind, SynthSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "coughscope", version, about = "Spectral and temporal descriptors of short audio recordings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract descriptors from WAV files and write a group report.
    Analyze(AnalyzeArgs),
    /// Rank two or more groups by the mean and max of every descriptor.
    Compare(CompareArgs),
    /// Write a deterministic synthetic test signal as 16-bit WAV.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FluxArg {
    /// Min-max normalize each recording.
    Minmax,
    /// Min-max normalize the pooled group.
    Group,
    Raw,
}

impl From<FluxArg> for FluxNormalization {
    fn from(f: FluxArg) -> Self {
        match f {
            FluxArg::Minmax => FluxNormalization::RecordMinMax,
            FluxArg::Group => FluxNormalization::GroupMinMax,
            FluxArg::Raw => FluxNormalization::Raw,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FeatureArgs {
    #[arg(long, default_value_t = DEFAULT_FRAME_LENGTH)]
    pub frame_length: usize,
    #[arg(long, default_value_t = DEFAULT_HOP)]
    pub hop: usize,
    #[arg(long, default_value_t = 0.85)]
    pub roll_percent: f64,
    /// Report raw entropy in bits instead of dividing by log2(bins).
    #[arg(long)]
    pub no_entropy_norm: bool,
    #[arg(long, value_enum, default_value_t = FluxArg::Minmax)]
    pub flux: FluxArg,
    /// Leave silent frames out of statistics and histograms.
    #[arg(long)]
    pub exclude_silent: bool,
    #[arg(long, default_value_t = DEFAULT_HISTOGRAM_BINS)]
    pub bins: usize,
    #[arg(long, value_enum, default_value_t = Pooling::Frames)]
    pub pooling: Pooling,
}

impl FeatureArgs {
    pub fn config(&self) -> FeatureConfig {
        FeatureConfig {
            frame_length: self.frame_length,
            hop: self.hop,
            roll_percent: self.roll_percent,
            entropy_normalized: !self.no_entropy_norm,
            flux_normalization: self.flux.into(),
            ..FeatureConfig::default()
        }
    }

    pub fn options(&self) -> GroupOptions {
        GroupOptions {
            bins: self.bins,
            exclude_silent: self.exclude_silent,
            pooling: self.pooling,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// WAV files or glob patterns; `-` reads one WAV from standard input.
    pub inputs: Vec<String>,
    #[arg(long, default_value = "group")]
    pub group: String,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = ExportFormat::Csv)]
    pub format: ExportFormat,
    /// Also write per-frame series as `<group>.series.csv`.
    #[arg(long)]
    pub series: bool,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// Previously exported `<label>.report.json` files.
    pub reports: Vec<PathBuf>,
    /// A group to analyze on the fly: `LABEL=PATTERN[,PATTERN...]`. Repeatable.
    #[arg(long = "set", value_name = "LABEL=PATTERNS")]
    pub sets: Vec<String>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Add the published reference values as annotation columns.
    #[arg(long)]
    pub paper_ranges: bool,
    #[command(flatten)]
    pub features: FeatureArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(value_enum)]
    pub kind: SynthKind,
    /// Sine frequency or vowel fundamental in Hz.
    #[arg(long)]
    pub freq: Option<f64>,
    /// Duration in seconds.
    #[arg(long, default_value_t = 1.0)]
    pub dur: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cough envelope time constant in seconds.
    #[arg(long, default_value_t = 0.1)]
    pub decay: f64,
    #[arg(long, default_value_t = 6)]
    pub harmonics: usize,
    #[arg(long, default_value_t = crate::ingest::CANONICAL_RATE)]
    pub rate: u32,
    /// Output WAV path; standard output when omitted or `-`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SynthArgs {
    pub fn spec(&self) -> SynthSpec {
        let base = SynthSpec::new(self.kind);
        SynthSpec {
            frequency: self.freq.unwrap_or(base.frequency),
            duration: self.dur,
            seed: self.seed,
            decay: self.decay,
            harmonics: self.harmonics,
            sample_rate: self.rate,
            ..base
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> i32 {
    match cli.command {
        Command::Analyze(args) => run_analyze(&args),
        Command::Compare(args) => run_compare(&args),
        Command::Synth(args) => run_synth(&args),
    }
}

fn warn(msg: impl std::fmt::Display) {
    eprintln!("warning: {msg}");
}

fn has_glob_chars(s: &str) -> bool {
    s.contains(['*', '?', '['])
}

enum Source {
    Stdin,
    File(PathBuf),
}

fn resolve_inputs(patterns: &[String]) -> Vec<Source> {
    let mut out = Vec::new();
    for p in patterns {
        if p == "-" {
            out.push(Source::Stdin);
        } else if has_glob_chars(p) {
            match glob::glob(p) {
                Ok(paths) => {
                    let mut matched: Vec<PathBuf> = paths.filter_map(Result::ok).collect();
                    matched.sort();
                    if matched.is_empty() {
                        warn(format!("pattern `{p}` matched no files"));
                    }
                    out.extend(matched.into_iter().map(Source::File));
                }
                Err(e) => warn(format!("bad pattern `{p}`: {e}")),
            }
        } else {
            out.push(Source::File(PathBuf::from(p)));
        }
    }
    out
}

fn load(source: &Source, stdin_bytes: Option<&[u8]>) -> Result<AudioClip, IngestError> {
    let clip = match source {
        Source::Stdin => decode_wav_reader(Cursor::new(stdin_bytes.unwrap_or_default()), "-")?,
        Source::File(path) => decode_wav(path)?,
    };
    canonicalize(&clip)
}

/// Decodes and canonicalizes every input, warning about the ones that fail.
fn load_clips(patterns: &[String], label: &str) -> Vec<AudioClip> {
    let sources = resolve_inputs(patterns);
    let stdin_bytes = if sources.iter().any(|s| matches!(s, Source::Stdin)) {
        let mut buf = Vec::new();
        if let Err(e) = io::stdin().lock().read_to_end(&mut buf) {
            warn(format!("reading standard input: {e}"));
        }
        Some(buf)
    } else {
        None
    };

    let loaded: Vec<(String, Result<AudioClip, IngestError>)> = sources
        .par_iter()
        .map(|s| {
            let name = match s {
                Source::Stdin => "-".to_string(),
                Source::File(p) => p.display().to_string(),
            };
            (name, load(s, stdin_bytes.as_deref()))
        })
        .collect();

    loaded
        .into_iter()
        .filter_map(|(name, r)| match r {
            Ok(clip) => Some(clip.with_label(label)),
            Err(e) => {
                warn(format!("skipping {name}: {e}"));
                None
            }
        })
        .collect()
}

fn analyze_inputs(patterns: &[String], label: &str, features: &FeatureArgs) -> Result<GroupAnalysis, i32> {
    let clips = load_clips(patterns, label);
    if clips.is_empty() {
        eprintln!("error: no valid input files for group `{label}`");
        return Err(EXIT_USAGE);
    }
    match analyze_group(&clips, label, &features.config(), &features.options()) {
        Ok(analysis) => {
            for s in &analysis.report.skipped {
                warn(format!("skipping {}: {}", s.source, s.reason));
            }
            Ok(analysis)
        }
        Err(ReportError::NoUsableClips { label, skipped }) => {
            for s in &skipped {
                warn(format!("skipping {}: {}", s.source, s.reason));
            }
            eprintln!("error: no usable clips in group `{label}`");
            Err(EXIT_USAGE)
        }
        Err(e) => Err(report_exit(&e)),
    }
}

fn report_exit(e: &ReportError) -> i32 {
    eprintln!("error: {e}");
    match e {
        ReportError::Io(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

pub fn run_analyze(args: &AnalyzeArgs) -> i32 {
    if args.inputs.is_empty() {
        eprintln!("error: analyze needs at least one input");
        return EXIT_USAGE;
    }
    let analysis = match analyze_inputs(&args.inputs, &args.group, &args.features) {
        Ok(a) => a,
        Err(code) => return code,
    };
    if let Err(e) = write_analysis(&analysis, args) {
        return report_exit(&e);
    }
    print!("{}", format_stats_table(&analysis.report));
    EXIT_OK
}

fn write_analysis(analysis: &GroupAnalysis, args: &AnalyzeArgs) -> Result<(), ReportError> {
    export_group(&analysis.report, args.format, &args.out)?;
    if args.series {
        export_series(&analysis.report.group_label, &analysis.features, &args.out)?;
    }
    Ok(())
}

fn parse_set(set: &str) -> Option<(String, Vec<String>)> {
    let (label, patterns) = set.split_once('=')?;
    let patterns: Vec<String> = patterns
        .split(',')
        .filter(|p| !p.is_empty())
        .map(str::to_string)
        .collect();
    (!label.is_empty() && !patterns.is_empty()).then(|| (label.to_string(), patterns))
}

pub fn run_compare(args: &CompareArgs) -> i32 {
    let mut reports: Vec<GroupReport> = Vec::new();
    for path in &args.reports {
        match read_group_report(path) {
            Ok(r) => reports.push(r),
            Err(e) => {
                eprintln!("error: reading {}: {e}", path.display());
                return match e {
                    ReportError::Io(_) => EXIT_IO,
                    _ => EXIT_USAGE,
                };
            }
        }
    }
    for set in &args.sets {
        let Some((label, patterns)) = parse_set(set) else {
            eprintln!("error: `--set {set}` must look like LABEL=PATTERN[,PATTERN...]");
            return EXIT_USAGE;
        };
        match analyze_inputs(&patterns, &label, &args.features) {
            Ok(a) => reports.push(a.report),
            Err(code) => return code,
        }
    }

    let comparison = match compare_groups(&reports) {
        Ok(c) => c,
        Err(e) => return report_exit(&e),
    };
    for format in [ExportFormat::Json, ExportFormat::Csv] {
        if let Err(e) = export_comparison(&comparison, format, &args.out, args.paper_ranges) {
            return report_exit(&e);
        }
    }
    print!("{}", format_orderings(&comparison, args.paper_ranges));
    EXIT_OK
}

pub fn run_synth(args: &SynthArgs) -> i32 {
    let clip = match synth(&args.spec()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let bytes = match crate::report::encode_wav(&clip) {
        Ok(b) => b,
        Err(e) => return report_exit(&e),
    };
    let result = match args.out.as_deref() {
        None => write_stdout(&bytes),
        Some(p) if p == Path::new("-") => write_stdout(&bytes),
        Some(p) => std::fs::write(p, &bytes),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: writing WAV: {e}");
            EXIT_IO
        }
    }
}

fn write_stdout(bytes: &[u8]) -> io::Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(bytes)?;
    out.flush()
}
