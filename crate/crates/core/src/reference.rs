//! Published per-group statistics for voiced cough, unvoiced cough and speech
//! recordings, shipped for side-by-side display next to user results.
//!
//! The numbers are context only. They describe a private recording set and
//! are never used as expected values for user audio. Cells are stored as the
//! exact printed text (e.g. `"0.230"`, `"0.0"`) so the data can be compared
//! verbatim.

use serde::Serialize;

use crate::features::Descriptor;
use crate::stats::SummaryStats;

/// Column headers in printed order.
pub const COLUMNS: [&str; 7] = ["min", "max", "Mean", "med_25", "median", "med_75", "Std"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub descriptor: Descriptor,
    pub label: &'static str,
    /// min, max, mean, p25, median, p75, std as printed.
    pub cells: [&'static str; 7],
}

impl ReferenceRow {
    pub fn values(&self) -> [f64; 7] {
        self.cells.map(|c| c.parse().expect("reference cells are numeric"))
    }

    pub fn stats(&self) -> SummaryStats {
        SummaryStats::from_columns(self.values())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceTable {
    pub group: &'static str,
    pub title: &'static str,
    pub rows: [ReferenceRow; 7],
}

impl ReferenceTable {
    pub fn row(&self, descriptor: Descriptor) -> &ReferenceRow {
        self.rows
            .iter()
            .find(|r| r.descriptor == descriptor)
            .expect("every descriptor has a row")
    }
}

const fn row(descriptor: Descriptor, label: &'static str, cells: [&'static str; 7]) -> ReferenceRow {
    ReferenceRow { descriptor, label, cells }
}

use Descriptor::*;

pub const VOICED_COUGH: ReferenceTable = ReferenceTable {
    group: "cough_voiced",
    title: "Statistical analysis of cough with voiced content",
    rows: [
        row(Rolloff, "Spectral Roll-off (in Hz)", ["1378", "9216", "4451", "2670", "4392", "5943", "1949"]),
        row(Entropy, "Spectral Entropy", ["0", "1", "0.067", "0.001", "0.005", "0.021", "0.174"]),
        row(Flatness, "Spectral Flatness", ["0", "0.047", "0.012", "0.003", "0.01", "0.018", "0.011"]),
        row(Flux, "Spectral Flux", ["0", "1", "0.409", "0.293", "0.402", "0.551", "0.225"]),
        row(Zcr, "Zero Crossing Rate", ["0.025", "0.225", "0.1", "0.061", "0.086", "0.131", "0.046"]),
        row(Centroid, "Spectral Centroid (Hz)", ["1045", "3996", "2154", "1542", "2122", "2619", "700"]),
        row(Bandwidth, "Spectral Bandwidth (Hz)", ["1273", "3605", "2286", "1864", "2276", "2680", "527"]),
    ],
};

pub const UNVOICED_COUGH: ReferenceTable = ReferenceTable {
    group: "cough_unvoiced",
    title: "Statistical analysis of cough with unvoiced content",
    rows: [
        row(Rolloff, "Spectral Roll-off (in Hz)", ["1808", "9819", "5705", "4392", "5555", "7321", "1961"]),
        row(Entropy, "Spectral Entropy", ["0", "1", "0.079", "0.003", "0.023", "0.076", "0.15"]),
        row(Flatness, "Spectral Flatness", ["0", "0.221", "0.057", "0.009", "0.036", "0.094", "0.057"]),
        row(Flux, "Spectral Flux", ["0", "1", "0.438", "0.324", "0.45", "0.552", "0.222"]),
        row(Zcr, "Zero Crossing Rate", ["0.035", "0.51", "0.222", "0.144", "0.230", "0.305", "0.097"]),
        row(Centroid, "Spectral Centroid (Hz)", ["907", "5397", "3124", "2473", "3229", "3730", "917"]),
        row(Bandwidth, "Spectral Bandwidth (Hz)", ["1307", "3760", "2348", "1807", "2470", "2792", "574"]),
    ],
};

pub const SPEECH: ReferenceTable = ReferenceTable {
    group: "speech",
    title: "Statistical analysis of speech signals",
    rows: [
        row(Rolloff, "Spectral Roll-off (in Hz)", ["861", "3445", "1770", "1335", "1636", "2153", "597"]),
        row(Entropy, "Spectral Entropy", ["0", "1", "0.062", "0", "0", "0.01", "0.18"]),
        row(Flatness, "Spectral Flatness", ["0", "0", "0", "0", "0", "0", "0"]),
        row(Flux, "Spectral Flux", ["0.0", "1", "0.304", "0.148", "0.258", "0.44", "0.221"]),
        row(Zcr, "Zero Crossing Rate", ["0.02", "0.102", "0.060", "0.051", "0.06", "0.07", "0.016"]),
        row(Centroid, "Spectral Centroid (Hz)", ["583", "1626", "1019", "867", "994", "1152", "221"]),
        row(Bandwidth, "Spectral Bandwidth (Hz)", ["381", "1349", "745", "565", "719", "874", "218"]),
    ],
};

pub const TABLES: [ReferenceTable; 3] = [VOICED_COUGH, UNVOICED_COUGH, SPEECH];

/// One line per row, `table|label|cells...`, tables numbered from 1.
pub fn canonical_text() -> String {
    let mut out = String::new();
    for (i, table) in TABLES.iter().enumerate() {
        for r in &table.rows {
            out.push_str(&format!("{}|{}|{}\n", i + 1, r.label, r.cells.join("|")));
        }
    }
    out
}
