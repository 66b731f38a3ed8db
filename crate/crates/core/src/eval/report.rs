use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::Metrics;
use crate::error::{Error, Result};
use crate::util::write_atomic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub n_train: usize,
    /// Training rows after oversampling.
    pub n_train_balanced: usize,
    pub n_test: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl FoldMetrics {
    pub fn metrics(&self) -> Metrics {
        Metrics {
            precision: self.precision,
            recall: self.recall,
            f1: self.f1,
        }
    }
}

/// One evaluated configuration: a detection run or one ladder rung.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub label: String,
    pub folds: Vec<FoldMetrics>,
    pub mean: Metrics,
}

impl EvalRow {
    pub fn new(label: impl Into<String>, folds: Vec<FoldMetrics>) -> Self {
        let mean = Metrics::mean(&folds.iter().map(FoldMetrics::metrics).collect::<Vec<_>>());
        EvalRow {
            label: label.into(),
            folds,
            mean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub rows: Vec<EvalRow>,
    pub notes: Vec<String>,
}

impl EvalReport {
    pub fn row(&self, label: &str) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::data(format!("eval report: {e}")))
    }

    /// CSV with the config echoed as leading `#` lines and a `mean` line per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# experiment={}", self.experiment);
        for (k, v) in &self.config {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("row,fold,n_train,n_train_balanced,n_test,precision,recall,f1\n");
        for row in &self.rows {
            for f in &row.folds {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    row.label, f.fold, f.n_train, f.n_train_balanced, f.n_test, f.precision, f.recall, f.f1
                );
            }
            let _ = writeln!(
                out,
                "{},mean,,,,{},{},{}",
                row.label, row.mean.precision, row.mean.recall, row.mean.f1
            );
        }
        out
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        write_atomic(&dir.join(format!("{stem}.json")), self.to_json().as_bytes())?;
        write_atomic(&dir.join(format!("{stem}.csv")), self.to_csv().as_bytes())
    }
}
