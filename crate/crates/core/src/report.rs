//! Per-group characterization reports, group comparisons and their CSV/JSON exports.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Cursor};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{extract_all, minmax_normalize, Descriptor, FeatureConfig, FeatureError, FeatureSet, FluxNormalization};
use crate::framing::FramingError;
use crate::ingest::AudioClip;
use crate::reference::{self, ReferenceTable};
use crate::stats::{build_histogram, summarize, Histogram, StatsError, SummaryStats, DEFAULT_HISTOGRAM_BINS};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("group has no clips")]
    EmptyGroup,
    #[error("no usable clips in group `{label}` ({} skipped)", skipped.len())]
    NoUsableClips { label: String, skipped: Vec<SkippedClip> },
    #[error("clip `{0}` is not at the canonical sample rate")]
    NonCanonical(String),
    #[error("need at least 2 groups to compare, got {0}")]
    TooFewGroups(usize),
    #[error("duplicate group label `{0}`")]
    DuplicateLabels(String),
    #[error("invalid group label `{0}`")]
    InvalidLabel(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    /// Every frame of every clip weighs the same.
    #[default]
    Frames,
    /// Summarize each clip, then average each statistic across clips.
    Recordings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupOptions {
    pub bins: usize,
    pub exclude_silent: bool,
    pub pooling: Pooling,
}

impl Default for GroupOptions {
    fn default() -> Self {
        Self {
            bins: DEFAULT_HISTOGRAM_BINS,
            exclude_silent: false,
            pooling: Pooling::Frames,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedClip {
    pub source: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeReport {
    /// Number of pooled values.
    pub count: usize,
    /// `None` when no values survived (e.g. flux over single-frame clips).
    pub stats: Option<SummaryStats>,
    pub histogram: Option<Histogram>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub group_label: String,
    pub clip_count: usize,
    pub frame_count: usize,
    pub silent_frame_count: usize,
    pub per_attribute: BTreeMap<Descriptor, AttributeReport>,
    pub config_echo: FeatureConfig,
    pub options: GroupOptions,
    #[serde(default)]
    pub skipped: Vec<SkippedClip>,
}

impl GroupReport {
    pub fn stats(&self, descriptor: Descriptor) -> Option<&SummaryStats> {
        self.per_attribute.get(&descriptor).and_then(|a| a.stats.as_ref())
    }
}

/// A report together with the per-clip series it was built from.
#[derive(Debug, Clone)]
pub struct GroupAnalysis {
    pub report: GroupReport,
    pub features: Vec<FeatureSet>,
}

fn check_label(label: &str) -> Result<(), ReportError> {
    let ok = !label.is_empty()
        && label != "."
        && label != ".."
        && !label.contains(['/', '\\', '\0']);
    if ok {
        Ok(())
    } else {
        Err(ReportError::InvalidLabel(label.to_string()))
    }
}

pub fn characterize_group(
    clips: &[AudioClip],
    label: &str,
    config: &FeatureConfig,
    options: &GroupOptions,
) -> Result<GroupReport, ReportError> {
    analyze_group(clips, label, config, options).map(|a| a.report)
}

/// Extracts every clip (in parallel) and pools the results into a [`GroupReport`].
///
/// Clips shorter than one frame are recorded in `skipped`; the group fails
/// only if none remain.
pub fn analyze_group(
    clips: &[AudioClip],
    label: &str,
    config: &FeatureConfig,
    options: &GroupOptions,
) -> Result<GroupAnalysis, ReportError> {
    check_label(label)?;
    if clips.is_empty() {
        return Err(ReportError::EmptyGroup);
    }
    if let Some(c) = clips.iter().find(|c| !c.is_canonical()) {
        return Err(ReportError::NonCanonical(c.source_path().to_string()));
    }
    config.validate()?;

    let results: Vec<Result<FeatureSet, FeatureError>> =
        clips.par_iter().map(|clip| extract_all(clip, config)).collect();

    let mut features = Vec::new();
    let mut skipped = Vec::new();
    for (clip, result) in clips.iter().zip(results) {
        match result {
            Ok(set) => features.push(set),
            Err(FeatureError::Framing(e @ FramingError::ClipTooShort { .. })) => skipped.push(SkippedClip {
                source: clip.source_path().to_string(),
                reason: e.to_string(),
            }),
            Err(e) => return Err(e.into()),
        }
    }
    if features.is_empty() {
        return Err(ReportError::NoUsableClips {
            label: label.to_string(),
            skipped,
        });
    }

    if config.flux_normalization == FluxNormalization::GroupMinMax {
        normalize_flux_across(&mut features);
    }

    let report = pool(&features, label, config, options, skipped)?;
    Ok(GroupAnalysis { report, features })
}

fn normalize_flux_across(features: &mut [FeatureSet]) {
    let pooled: Vec<f64> = features.iter().flat_map(|f| f.flux_raw.iter().copied()).collect();
    let mut normalized = minmax_normalize(&pooled).into_iter();
    for set in features.iter_mut() {
        let series = set.series.get_mut(&Descriptor::Flux).expect("flux series");
        series.values = normalized.by_ref().take(set.flux_raw.len()).collect();
    }
}

fn clip_values(set: &FeatureSet, descriptor: Descriptor, exclude_silent: bool) -> Vec<f64> {
    if exclude_silent {
        set.values_excluding_silent(descriptor)
    } else {
        set.values(descriptor).to_vec()
    }
}

fn pool(
    features: &[FeatureSet],
    label: &str,
    config: &FeatureConfig,
    options: &GroupOptions,
    skipped: Vec<SkippedClip>,
) -> Result<GroupReport, ReportError> {
    let mut per_attribute = BTreeMap::new();
    for descriptor in Descriptor::ALL {
        let per_clip: Vec<Vec<f64>> = features
            .iter()
            .map(|f| clip_values(f, descriptor, options.exclude_silent))
            .collect();
        let pooled: Vec<f64> = per_clip.iter().flatten().copied().collect();

        let report = if pooled.is_empty() {
            AttributeReport {
                count: 0,
                stats: None,
                histogram: None,
            }
        } else {
            let stats = match options.pooling {
                Pooling::Frames => summarize(&pooled)?,
                Pooling::Recordings => average_stats(&per_clip)?,
            };
            AttributeReport {
                count: pooled.len(),
                stats: Some(stats),
                histogram: Some(build_histogram(&pooled, options.bins, None)?),
            }
        };
        per_attribute.insert(descriptor, report);
    }

    Ok(GroupReport {
        group_label: label.to_string(),
        clip_count: features.len(),
        frame_count: features.iter().map(|f| f.frame_count).sum(),
        silent_frame_count: features.iter().map(|f| f.silent.iter().filter(|s| **s).count()).sum(),
        per_attribute,
        config_echo: config.clone(),
        options: options.clone(),
        skipped,
    })
}

/// Column-wise mean of per-clip summaries; clips with no values are left out.
fn average_stats(per_clip: &[Vec<f64>]) -> Result<SummaryStats, StatsError> {
    let summaries = per_clip
        .iter()
        .filter(|v| !v.is_empty())
        .map(|v| summarize(v))
        .collect::<Result<Vec<_>, _>>()?;
    if summaries.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let n = summaries.len() as f64;
    let mut acc = [0.0; 7];
    for s in &summaries {
        for (a, v) in acc.iter_mut().zip(s.columns()) {
            *a += v;
        }
    }
    Ok(SummaryStats::from_columns(acc.map(|a| a / n)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Mean,
    Max,
}

impl Statistic {
    pub const COMPARED: [Statistic; 2] = [Statistic::Mean, Statistic::Max];

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Max => "max",
        }
    }

    pub fn of(self, stats: &SummaryStats) -> f64 {
        match self {
            Statistic::Mean => stats.mean,
            Statistic::Max => stats.max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub label: String,
    pub value: Option<f64>,
    /// 1-based competition rank; tied values share a rank.
    pub rank: usize,
}

/// Descending ranking of groups by one statistic of one attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingFact {
    pub attribute: Descriptor,
    pub statistic: Statistic,
    pub ranking: Vec<RankEntry>,
    pub tie: bool,
}

impl OrderingFact {
    /// e.g. `cough > speech = vowel`.
    pub fn ranking_text(&self) -> String {
        let mut out = String::new();
        for (i, e) in self.ranking.iter().enumerate() {
            if i > 0 {
                let prev = &self.ranking[i - 1];
                out.push_str(if prev.rank == e.rank { " = " } else { " > " });
            }
            out.push_str(&e.label);
        }
        out
    }

    pub fn first(&self) -> &str {
        &self.ranking[0].label
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceAnnotation {
    pub group: String,
    pub attribute: Descriptor,
    /// min, max, mean, p25, median, p75, std as printed.
    pub cells: Vec<String>,
}

impl ReferenceAnnotation {
    fn from_table(table: &ReferenceTable) -> impl Iterator<Item = ReferenceAnnotation> + '_ {
        table.rows.iter().map(|r| ReferenceAnnotation {
            group: table.group.to_string(),
            attribute: r.descriptor,
            cells: r.cells.iter().map(|c| c.to_string()).collect(),
        })
    }

    pub fn cell(&self, statistic: Statistic) -> &str {
        match statistic {
            Statistic::Mean => &self.cells[2],
            Statistic::Max => &self.cells[1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub reports: Vec<GroupReport>,
    pub orderings: Vec<OrderingFact>,
    pub reference: Vec<ReferenceAnnotation>,
}

impl ComparisonReport {
    pub fn ordering(&self, attribute: Descriptor, statistic: Statistic) -> Option<&OrderingFact> {
        self.orderings
            .iter()
            .find(|o| o.attribute == attribute && o.statistic == statistic)
    }

    /// True when every ordering fact matches a recomputation from `reports`.
    pub fn is_consistent(&self) -> bool {
        compute_orderings(&self.reports) == self.orderings
    }
}

fn compute_orderings(reports: &[GroupReport]) -> Vec<OrderingFact> {
    let mut facts = Vec::new();
    for attribute in Descriptor::ALL {
        for statistic in Statistic::COMPARED {
            let mut entries: Vec<(String, Option<f64>)> = reports
                .iter()
                .map(|r| (r.group_label.clone(), r.stats(attribute).map(|s| statistic.of(s))))
                .collect();
            // descending; missing values last; label breaks ties for a stable order
            entries.sort_by(|a, b| match (a.1, b.1) {
                (Some(x), Some(y)) => y.total_cmp(&x).then_with(|| a.0.cmp(&b.0)),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => a.0.cmp(&b.0),
            });
            let mut ranking: Vec<RankEntry> = Vec::with_capacity(entries.len());
            let mut tie = false;
            for (i, (label, value)) in entries.into_iter().enumerate() {
                let rank = match ranking.last() {
                    Some(prev) if prev.value == value => {
                        tie = true;
                        prev.rank
                    }
                    _ => i + 1,
                };
                ranking.push(RankEntry { label, value, rank });
            }
            facts.push(OrderingFact {
                attribute,
                statistic,
                ranking,
                tie,
            });
        }
    }
    facts
}

pub fn compare_groups(reports: &[GroupReport]) -> Result<ComparisonReport, ReportError> {
    if reports.len() < 2 {
        return Err(ReportError::TooFewGroups(reports.len()));
    }
    let mut seen = BTreeSet::new();
    for r in reports {
        if !seen.insert(r.group_label.as_str()) {
            return Err(ReportError::DuplicateLabels(r.group_label.clone()));
        }
    }
    Ok(ComparisonReport {
        reports: reports.to_vec(),
        orderings: compute_orderings(reports),
        reference: reference::TABLES.iter().flat_map(ReferenceAnnotation::from_table).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    #[default]
    Csv,
    Json,
}

fn num(v: f64) -> String {
    // Display for f64 is the shortest representation that round-trips
    format!("{v}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn stats_csv(report: &GroupReport) -> String {
    let mut out = String::from("attribute,min,max,mean,p25,median,p75,std\n");
    for (descriptor, attr) in &report.per_attribute {
        out.push_str(descriptor.name());
        match &attr.stats {
            Some(s) => s.columns().iter().for_each(|v| {
                out.push(',');
                out.push_str(&num(*v));
            }),
            None => out.push_str(",,,,,,,"),
        }
        out.push('\n');
    }
    out
}

pub fn histogram_csv(histogram: &Histogram) -> String {
    let mut out = String::from("bin_lo,bin_hi,count\n");
    for (lo, hi, count) in histogram.rows() {
        let _ = writeln!(out, "{},{},{}", num(lo), num(hi), count);
    }
    out
}

/// Writes `<label>.stats.csv` and one `<label>.<attribute>.hist.csv` per
/// attribute, or `<label>.report.json`. Returns the written paths.
pub fn export_group(report: &GroupReport, format: ExportFormat, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
    check_label(&report.group_label)?;
    fs::create_dir_all(dir)?;
    let label = &report.group_label;
    let mut written = Vec::new();
    match format {
        ExportFormat::Csv => {
            let path = dir.join(format!("{label}.stats.csv"));
            fs::write(&path, stats_csv(report))?;
            written.push(path);
            for (descriptor, attr) in &report.per_attribute {
                if let Some(h) = &attr.histogram {
                    let path = dir.join(format!("{label}.{}.hist.csv", descriptor.name()));
                    fs::write(&path, histogram_csv(h))?;
                    written.push(path);
                }
            }
        }
        ExportFormat::Json => {
            let path = dir.join(format!("{label}.report.json"));
            fs::write(&path, serde_json::to_string_pretty(report)? + "\n")?;
            written.push(path);
        }
    }
    Ok(written)
}

pub fn read_group_report(path: &Path) -> Result<GroupReport, ReportError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// One row per (attribute, statistic) with the ranking, each group's value
/// and, if `with_reference`, the published reference value per table.
pub fn orderings_csv(report: &ComparisonReport, with_reference: bool) -> String {
    let labels: Vec<&str> = report.reports.iter().map(|r| r.group_label.as_str()).collect();
    let mut out = String::from("attribute,statistic,ranking,tie");
    for l in &labels {
        let _ = write!(out, ",{l}");
    }
    if with_reference {
        for t in &reference::TABLES {
            let _ = write!(out, ",ref_{}", t.group);
        }
    }
    out.push('\n');

    for fact in &report.orderings {
        let _ = write!(
            out,
            "{},{},{},{}",
            fact.attribute.name(),
            fact.statistic.name(),
            fact.ranking_text(),
            fact.tie
        );
        for l in &labels {
            let value = fact.ranking.iter().find(|e| e.label == *l).and_then(|e| e.value);
            let _ = write!(out, ",{}", opt_num(value));
        }
        if with_reference {
            for t in &reference::TABLES {
                let cell = report
                    .reference
                    .iter()
                    .find(|a| a.group == t.group && a.attribute == fact.attribute)
                    .map(|a| a.cell(fact.statistic))
                    .unwrap_or_default();
                let _ = write!(out, ",{cell}");
            }
        }
        out.push('\n');
    }
    out
}

/// Writes `comparison.orderings.csv` or `comparison.json` into `dir`.
pub fn export_comparison(
    report: &ComparisonReport,
    format: ExportFormat,
    dir: &Path,
    with_reference: bool,
) -> Result<PathBuf, ReportError> {
    fs::create_dir_all(dir)?;
    let path = match format {
        ExportFormat::Csv => {
            let path = dir.join("comparison.orderings.csv");
            fs::write(&path, orderings_csv(report, with_reference))?;
            path
        }
        ExportFormat::Json => {
            let path = dir.join("comparison.json");
            fs::write(&path, serde_json::to_string_pretty(report)? + "\n")?;
            path
        }
    };
    Ok(path)
}

/// Plot-ready per-frame series for every clip of a group.
///
/// `flux` on frame `i` is the flux between frames `i - 1` and `i`; it is empty on frame 0.
pub fn series_csv(features: &[FeatureSet]) -> String {
    let mut out = String::from(
        "clip,frame,time_s,silent,rolloff,entropy,flatness,flux,flux_raw,zcr,centroid,bandwidth\n",
    );
    for set in features {
        let clip = set.source.replace([',', '\n'], "_");
        for i in 0..set.frame_count {
            let (flux, flux_raw) = if i == 0 {
                (String::new(), String::new())
            } else {
                (num(set.values(Descriptor::Flux)[i - 1]), num(set.flux_raw[i - 1]))
            };
            let v = |d| num(set.values(d)[i]);
            let _ = writeln!(
                out,
                "{clip},{i},{},{},{},{},{},{flux},{flux_raw},{},{},{}",
                num(set.frame_times[i]),
                u8::from(set.silent[i]),
                v(Descriptor::Rolloff),
                v(Descriptor::Entropy),
                v(Descriptor::Flatness),
                v(Descriptor::Zcr),
                v(Descriptor::Centroid),
                v(Descriptor::Bandwidth),
            );
        }
    }
    out
}

pub fn export_series(label: &str, features: &[FeatureSet], dir: &Path) -> Result<PathBuf, ReportError> {
    check_label(label)?;
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{label}.series.csv"));
    fs::write(&path, series_csv(features))?;
    Ok(path)
}

/// 16-bit PCM mono WAV bytes; samples are rounded to the nearest step of 1/32768.
pub fn encode_wav(clip: &AudioClip) -> Result<Vec<u8>, ReportError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut cursor = Cursor::new(Vec::new());
    {
        let mut writer = hound::WavWriter::new(&mut cursor, spec).map_err(hound_io)?;
        for s in clip.samples() {
            let q = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
            writer.write_sample(q).map_err(hound_io)?;
        }
        writer.finalize().map_err(hound_io)?;
    }
    Ok(cursor.into_inner())
}

pub fn write_wav(clip: &AudioClip, path: &Path) -> Result<(), ReportError> {
    fs::write(path, encode_wav(clip)?)?;
    Ok(())
}

fn hound_io(e: hound::Error) -> ReportError {
    match e {
        hound::Error::IoError(e) => ReportError::Io(e),
        other => ReportError::Io(io::Error::other(other.to_string())),
    }
}

fn display_value(descriptor: Descriptor, v: f64) -> String {
    if descriptor.unit() == "Hz" {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

/// Fixed-width text table with columns min, max, Mean, med_25, median, med_75, Std.
pub fn format_stats_table(report: &GroupReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} ({} clips, {} frames)",
        report.group_label, report.clip_count, report.frame_count
    );
    let _ = write!(out, "{:<26}", "Attributes");
    for c in reference::COLUMNS {
        let _ = write!(out, "{c:>9}");
    }
    out.push('\n');
    for (descriptor, attr) in &report.per_attribute {
        let _ = write!(out, "{:<26}", descriptor.title());
        match &attr.stats {
            Some(s) => {
                for v in s.columns() {
                    let _ = write!(out, "{:>9}", display_value(*descriptor, v));
                }
            }
            None => {
                let _ = write!(out, "{:>9}", "-");
            }
        }
        out.push('\n');
    }
    out
}

pub fn format_orderings(report: &ComparisonReport, with_reference: bool) -> String {
    let mut out = String::new();
    for fact in &report.orderings {
        let _ = write!(
            out,
            "{:<10} {:<5} {}",
            fact.attribute.name(),
            fact.statistic.name(),
            fact.ranking_text()
        );
        if fact.tie {
            out.push_str("  [tie]");
        }
        if with_reference {
            out.push_str("  | reference");
            for a in report.reference.iter().filter(|a| a.attribute == fact.attribute) {
                let _ = write!(out, " {}={}", a.group, a.cell(fact.statistic));
            }
        }
        out.push('\n');
    }
    out
}
