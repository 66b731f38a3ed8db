//! Crowd-label aggregation: trust-weighted confidence, raw-vote majority,
//! inter-rater agreement and image-category majorities.

mod files;
mod image;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use files::{
    load_aggregated_labels, load_image_label_records, load_label_records, parse_aggregated_labels,
    parse_image_label_records, parse_label_records, write_aggregated_labels, write_image_label_records,
    write_label_records, ImageLabelRecord,
};
pub use image::{
    image_category_majority, image_label_from_votes, resolve_image_labels, ImageCategory, ImageLabel,
};

/// Default confidence cut for keeping a session.
pub const DEFAULT_CONFIDENCE: f64 = 0.6;

/// Slack used when comparing a confidence against a threshold, so sums of
/// trusts that land a rounding error below the cut still count as equal.
const CONFIDENCE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub session_id: String,
    pub rater_id: String,
    /// Rater trust in (0, 1].
    pub trust: f64,
    pub aggression_vote: bool,
    pub bullying_vote: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedLabel {
    pub session_id: String,
    pub n_raters: usize,
    pub aggression_votes: usize,
    pub bullying_votes: usize,
    pub aggression_confidence: f64,
    pub bullying_confidence: f64,
    pub is_bullying: bool,
    pub is_aggression: bool,
}

/// Which label a classifier or report targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Bullying,
    Aggression,
}

impl Target {
    pub fn as_str(self) -> &'static str {
        match self {
            Target::Bullying => "bullying",
            Target::Aggression => "aggression",
        }
    }
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bullying" => Ok(Target::Bullying),
            "aggression" => Ok(Target::Aggression),
            other => Err(Error::invalid(format!("unknown target {other:?}"))),
        }
    }
}

impl AggregatedLabel {
    pub fn votes(&self, target: Target) -> usize {
        match target {
            Target::Bullying => self.bullying_votes,
            Target::Aggression => self.aggression_votes,
        }
    }

    pub fn confidence(&self, target: Target) -> f64 {
        match target {
            Target::Bullying => self.bullying_confidence,
            Target::Aggression => self.aggression_confidence,
        }
    }

    pub fn is_positive(&self, target: Target) -> bool {
        match target {
            Target::Bullying => self.is_bullying,
            Target::Aggression => self.is_aggression,
        }
    }
}

/// Aggregated labels keyed by session id.
pub type LabelSet = BTreeMap<String, AggregatedLabel>;

pub fn label_set(labels: impl IntoIterator<Item = AggregatedLabel>) -> LabelSet {
    labels.into_iter().map(|l| (l.session_id.clone(), l)).collect()
}

/// Weighted-majority confidence: the trust share of the side holding more
/// trust mass. Equal mass resolves to the "no" side at 0.5.
fn weighted_confidence(votes: impl Iterator<Item = (bool, f64)>) -> f64 {
    let (mut yes, mut no) = (0.0, 0.0);
    for (vote, trust) in votes {
        if vote {
            yes += trust;
        } else {
            no += trust;
        }
    }
    let total = yes + no;
    if yes > no {
        yes / total
    } else if no > yes {
        no / total
    } else {
        0.5
    }
}

/// Aggregates one session's rater records.
pub fn aggregate_votes(records: &[LabelRecord]) -> Result<AggregatedLabel> {
    let first = records
        .first()
        .ok_or_else(|| Error::data("no label records to aggregate"))?;
    let mut raters = HashSet::new();
    for r in records {
        if r.session_id != first.session_id {
            return Err(Error::data(format!(
                "records mix sessions {} and {}",
                first.session_id, r.session_id
            )));
        }
        if !raters.insert(r.rater_id.as_str()) {
            return Err(Error::data(format!(
                "duplicate rater {} for session {}",
                r.rater_id, r.session_id
            )));
        }
        if !(r.trust > 0.0 && r.trust <= 1.0) {
            return Err(Error::data(format!(
                "rater {} trust {} outside (0, 1]",
                r.rater_id, r.trust
            )));
        }
    }
    let n = records.len();
    let aggression_votes = records.iter().filter(|r| r.aggression_vote).count();
    let bullying_votes = records.iter().filter(|r| r.bullying_vote).count();
    Ok(AggregatedLabel {
        session_id: first.session_id.clone(),
        n_raters: n,
        aggression_votes,
        bullying_votes,
        aggression_confidence: weighted_confidence(records.iter().map(|r| (r.aggression_vote, r.trust))),
        bullying_confidence: weighted_confidence(records.iter().map(|r| (r.bullying_vote, r.trust))),
        is_bullying: 2 * bullying_votes > n,
        is_aggression: 2 * aggression_votes > n,
    })
}

/// Groups records by session (first-appearance order) and aggregates each.
pub fn aggregate_all(records: &[LabelRecord]) -> Result<Vec<AggregatedLabel>> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<LabelRecord>> = BTreeMap::new();
    for r in records {
        let group = groups.entry(r.session_id.as_str()).or_default();
        if group.is_empty() {
            order.push(r.session_id.as_str());
        }
        group.push(r.clone());
    }
    order.iter().map(|id| aggregate_votes(&groups[id])).collect()
}

/// Keeps labels whose `target` confidence is at least `threshold`.
pub fn filter_by_confidence(
    labels: &[AggregatedLabel],
    threshold: f64,
    target: Target,
) -> Result<Vec<AggregatedLabel>> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::invalid(format!("confidence threshold {threshold} outside [0, 1]")));
    }
    Ok(labels
        .iter()
        .filter(|l| l.confidence(target) >= threshold - CONFIDENCE_SLACK)
        .cloned()
        .collect())
}

/// Fleiss' kappa for binary votes. `yes_counts[i]` is how many of the
/// `n_raters` raters voted yes on item `i`.
pub fn fleiss_kappa(yes_counts: &[usize], n_raters: usize) -> Result<f64> {
    if n_raters < 2 {
        return Err(Error::invalid("fleiss kappa needs at least two raters per item"));
    }
    if yes_counts.is_empty() {
        return Err(Error::invalid("fleiss kappa needs at least one item"));
    }
    if let Some(&bad) = yes_counts.iter().find(|&&c| c > n_raters) {
        return Err(Error::invalid(format!("yes count {bad} exceeds {n_raters} raters")));
    }
    let n = n_raters as f64;
    let items = yes_counts.len() as f64;
    let mut agreement = 0.0;
    let mut total_yes = 0.0;
    for &yes in yes_counts {
        let yes = yes as f64;
        let no = n - yes;
        agreement += (yes * (yes - 1.0) + no * (no - 1.0)) / (n * (n - 1.0));
        total_yes += yes;
    }
    let p_bar = agreement / items;
    let p_yes = total_yes / (items * n);
    let p_no = 1.0 - p_yes;
    let p_e = p_yes * p_yes + p_no * p_no;
    if (1.0 - p_e).abs() < 1e-15 {
        return Err(Error::numeric("kappa undefined: every vote falls in one category"));
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Summary of a label aggregation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregationReport {
    pub sessions: usize,
    pub kept: usize,
    pub dropped: usize,
    pub threshold: f64,
    pub target: Target,
    pub kappa_bullying: Option<f64>,
    pub kappa_aggression: Option<f64>,
    /// Sessions with more bullying than aggression votes.
    pub bullying_exceeds_aggression: Vec<String>,
    pub notes: Vec<String>,
}

/// Aggregates raw records, computes agreement and applies the confidence cut.
pub fn aggregate_with_report(
    records: &[LabelRecord],
    threshold: f64,
    target: Target,
) -> Result<(Vec<AggregatedLabel>, AggregationReport)> {
    let all = aggregate_all(records)?;
    let kept = filter_by_confidence(&all, threshold, target)?;
    let mut notes = Vec::new();

    let kappa = |votes: fn(&AggregatedLabel) -> usize, name: &str, notes: &mut Vec<String>| {
        let n = all.first()?.n_raters;
        if all.iter().any(|l| l.n_raters != n) {
            notes.push(format!("{name} kappa skipped: sessions have unequal rater counts"));
            return None;
        }
        let counts: Vec<usize> = all.iter().map(votes).collect();
        match fleiss_kappa(&counts, n) {
            Ok(k) => Some(k),
            Err(e) => {
                notes.push(format!("{name} kappa: {e}"));
                None
            }
        }
    };
    let kappa_bullying = kappa(|l| l.bullying_votes, "bullying", &mut notes);
    let kappa_aggression = kappa(|l| l.aggression_votes, "aggression", &mut notes);

    let violations: Vec<String> = all
        .iter()
        .filter(|l| l.bullying_votes > l.aggression_votes)
        .map(|l| l.session_id.clone())
        .collect();
    if !violations.is_empty() {
        notes.push(format!(
            "{} sessions have more bullying than aggression votes",
            violations.len()
        ));
    }
    let report = AggregationReport {
        sessions: all.len(),
        kept: kept.len(),
        dropped: all.len() - kept.len(),
        threshold,
        target,
        kappa_bullying,
        kappa_aggression,
        bullying_exceeds_aggression: violations,
        notes,
    };
    Ok((kept, report))
}
