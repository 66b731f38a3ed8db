use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{AggregatedLabel, LabelRecord};
use crate::error::{Error, Result};
use crate::util::write_atomic;

/// One rater's image categories for one session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageLabelRecord {
    pub session_id: String,
    pub rater_id: String,
    pub categories: Vec<String>,
}

fn parse_jsonl<T: DeserializeOwned>(text: &str, what: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(line)
            .map_err(|e| Error::data(format!("{what} line {}: {e}", idx + 1)))?;
        out.push(item);
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn parse_label_records(text: &str) -> Result<Vec<LabelRecord>> {
    parse_jsonl(text, "label file")
}

pub fn load_label_records(path: impl AsRef<Path>) -> Result<Vec<LabelRecord>> {
    parse_label_records(&read(path.as_ref())?)
}

pub fn parse_image_label_records(text: &str) -> Result<Vec<ImageLabelRecord>> {
    parse_jsonl(text, "image label file")
}

pub fn load_image_label_records(path: impl AsRef<Path>) -> Result<Vec<ImageLabelRecord>> {
    parse_image_label_records(&read(path.as_ref())?)
}

pub fn parse_aggregated_labels(text: &str) -> Result<Vec<AggregatedLabel>> {
    parse_jsonl(text, "aggregated label file")
}

pub fn load_aggregated_labels(path: impl AsRef<Path>) -> Result<Vec<AggregatedLabel>> {
    parse_aggregated_labels(&read(path.as_ref())?)
}

pub fn write_aggregated_labels(labels: &[AggregatedLabel], path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), jsonl(labels).as_bytes())
}

pub fn write_label_records(records: &[LabelRecord], path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), jsonl(records).as_bytes())
}

pub fn write_image_label_records(records: &[ImageLabelRecord], path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), jsonl(records).as_bytes())
}

pub(crate) fn jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("label records serialize"));
        out.push('\n');
    }
    out
}
