//! Descriptive reports over a labelled corpus: vote distributions, the
//! vote heatmap, negativity bins, temporal correlation, social graph
//! properties, LIWC-style ratios and image categories.

mod reports;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::write_atomic;

pub use reports::{
    graph_property_table, image_category_report, liwc_ratio_report, negativity_bin, negativity_bins_report,
    temporal_correlation_report, vote_distribution, vote_heatmap, NEGATIVITY_BINS, REPORT_NAMES,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    /// One cell per column; `None` marks an undefined value.
    pub cells: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub notes: Vec<String>,
}

impl Report {
    fn new(name: &str, columns: &[&str]) -> Self {
        Report {
            name: name.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn push(&mut self, label: impl Into<String>, cells: Vec<Option<f64>>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        debug_assert!(cells.iter().flatten().all(|v| v.is_finite()));
        self.rows.push(ReportRow {
            label: label.into(),
            cells,
        });
    }

    pub fn row(&self, label: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Cell by row label and column name; `None` if absent or null.
    pub fn cell(&self, row: &str, column: &str) -> Option<f64> {
        let j = self.columns.iter().position(|c| c == column)?;
        self.row(row)?.cells[j]
    }

    /// Null cells are written as empty fields; notes follow as `#` lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.label);
            for c in &r.cells {
                out.push(',');
                if let Some(v) = c {
                    let _ = write!(out, "{v}");
                }
            }
            out.push('\n');
        }
        for n in &self.notes {
            let _ = writeln!(out, "# {n}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::data(format!("report: {e}")))
    }

    /// One tab-separated `x y` series per column, skipping null cells.
    pub fn plot_series(&self) -> BTreeMap<String, String> {
        self.columns
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let mut s = String::from("x\ty\n");
                for r in &self.rows {
                    if let Some(v) = r.cells[j] {
                        let _ = writeln!(s, "{}\t{v}", r.label);
                    }
                }
                (c.clone(), s)
            })
            .collect()
    }

    /// Writes `<name>.csv` and `<name>.json`, plus `<name>.<column>.tsv`
    /// series when `plot_data` is set.
    pub fn write(&self, dir: &Path, plot_data: bool) -> Result<()> {
        write_atomic(&dir.join(format!("{}.csv", self.name)), self.to_csv().as_bytes())?;
        write_atomic(&dir.join(format!("{}.json", self.name)), self.to_json().as_bytes())?;
        if plot_data {
            for (column, series) in self.plot_series() {
                write_atomic(&dir.join(format!("{}.{column}.tsv", self.name)), series.as_bytes())?;
            }
        }
        Ok(())
    }
}
