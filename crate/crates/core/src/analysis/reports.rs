use std::collections::BTreeMap;

use super::Report;
use crate::corpus::{Corpus, MediaSession};
use crate::error::{Error, Result};
use crate::features::temporal_features;
use crate::labels::{AggregatedLabel, ImageCategory, ImageLabel, LabelSet, Target};
use crate::lexicon::{category_counts, tag_comment_negative, CategoryLexicon, Lexicon};
use crate::numerics::{pearson, stats::mean, welch_t};

pub const REPORT_NAMES: [&str; 7] = [
    "vote_distribution",
    "vote_heatmap",
    "negativity_bins",
    "temporal_correlation",
    "graph_properties",
    "liwc_ratios",
    "image_categories",
];

pub const NEGATIVITY_BINS: [&str; 10] = [
    "[0-10]", "(10-20]", "(20-30]", "(30-40]", "(40-50]", "(50-60]", "(60-70]", "(70-80]", "(80-90]", "(90-100]",
];

const TARGETS: [Target; 2] = [Target::Aggression, Target::Bullying];

/// Labelled sessions ordered by id, so reports ignore input order.
fn labelled<'a>(corpus: &'a Corpus, labels: &'a LabelSet) -> Vec<(&'a MediaSession, &'a AggregatedLabel)> {
    let mut out: Vec<_> = corpus
        .sessions
        .iter()
        .filter_map(|s| labels.get(&s.session_id).map(|l| (s, l)))
        .collect();
    out.sort_by(|a, b| a.0.session_id.cmp(&b.0.session_id));
    out
}

/// Fraction of sessions receiving exactly `j` votes, per target.
pub fn vote_distribution(labels: &LabelSet) -> Report {
    let mut report = Report::new("vote_distribution", &["aggression", "bullying"]);
    let max_raters = labels.values().map(|l| l.n_raters).max().unwrap_or(0);
    let n = labels.len() as f64;
    for j in 0..=max_raters {
        let cells = TARGETS
            .iter()
            .map(|&t| {
                (!labels.is_empty()).then(|| labels.values().filter(|l| l.votes(t) == j).count() as f64 / n)
            })
            .collect();
        report.push(j.to_string(), cells);
    }
    if labels.is_empty() {
        report.notes.push("no labelled sessions".into());
    }
    report
}

/// Session counts by (bullying votes, aggression votes). Rows are bullying
/// votes, columns aggression votes; cells below the diagonal are flagged.
pub fn vote_heatmap(labels: &LabelSet) -> Report {
    let size = labels.values().map(|l| l.n_raters).max().unwrap_or(0).max(5) + 1;
    let columns: Vec<String> = (0..size).map(|a| format!("aggression={a}")).collect();
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut report = Report::new("vote_heatmap", &column_refs);
    let mut grid = vec![vec![0usize; size]; size];
    for l in labels.values() {
        grid[l.bullying_votes][l.aggression_votes] += 1;
    }
    for (b, row) in grid.iter().enumerate() {
        report.push(format!("bullying={b}"), row.iter().map(|&c| Some(c as f64)).collect());
        for (a, &c) in row.iter().enumerate() {
            if b > a && c > 0 {
                report.notes.push(format!(
                    "below diagonal: bullying={b} aggression={a} ({c} sessions)"
                ));
            }
        }
    }
    report
}

/// Bin index for `negative` of `total` comments tagged negative:
/// `[0,10]` is bin 0, then `(10k, 10k+10]` is bin k. Exact integer arithmetic.
pub fn negativity_bin(negative: usize, total: usize) -> usize {
    assert!(total > 0 && negative <= total);
    let tenths_ceil = (10 * negative).div_ceil(total);
    tenths_ceil.saturating_sub(1)
}

/// Per negativity bin: session count and the percentage of sessions whose
/// majority label is positive.
pub fn negativity_bins_report(corpus: &Corpus, labels: &LabelSet, profanity: &Lexicon) -> Report {
    let mut report = Report::new("negativity_bins", &["sessions", "aggression_pct", "bullying_pct"]);
    let mut bins = vec![(0usize, [0usize; 2]); NEGATIVITY_BINS.len()];
    let mut skipped = 0;
    for (s, l) in labelled(corpus, labels) {
        if s.comments.is_empty() {
            skipped += 1;
            continue;
        }
        let negative = s.comments.iter().filter(|c| tag_comment_negative(c, profanity)).count();
        let bin = &mut bins[negativity_bin(negative, s.comments.len())];
        bin.0 += 1;
        for (k, &t) in TARGETS.iter().enumerate() {
            if l.is_positive(t) {
                bin.1[k] += 1;
            }
        }
    }
    for (name, (n, pos)) in NEGATIVITY_BINS.iter().zip(&bins) {
        let pct = |k: usize| (*n > 0).then(|| 100.0 * pos[k] as f64 / *n as f64);
        report.push(*name, vec![Some(*n as f64), pct(0), pct(1)]);
    }
    if skipped > 0 {
        report.notes.push(format!("{skipped} sessions without comments skipped"));
    }
    report
}

fn welch_cell(report: &mut Report, what: &str, a: &[f64], b: &[f64]) -> Option<f64> {
    match welch_t(a, b) {
        Ok(w) => Some(w.p_two_sided),
        Err(e) => {
            report.notes.push(format!("{what}: p undefined ({e})"));
            None
        }
    }
}

/// Pearson r between vote counts and per-threshold gap counts, plus the
/// mean fraction of gaps within an hour by class with a Welch p-value.
pub fn temporal_correlation_report(corpus: &Corpus, labels: &LabelSet, thresholds: &[i64]) -> Result<Report> {
    let mut report = Report::new(
        "temporal_correlation",
        &["r_aggression", "r_bullying", "mean_positive", "mean_negative", "p"],
    );
    let rows: Vec<_> = labelled(corpus, labels)
        .into_iter()
        .map(|(s, l)| (temporal_features(s, thresholds), l))
        .filter(|(f, _)| !f.insufficient_comments)
        .collect();
    if rows.len() < 3 {
        return Err(Error::data(format!(
            "temporal correlation needs 3 sessions with 2+ comments, found {}",
            rows.len()
        )));
    }
    for (i, t) in thresholds.iter().enumerate() {
        let counts: Vec<f64> = rows.iter().map(|(f, _)| f.counts[i] as f64).collect();
        let mut cells = Vec::new();
        for target in TARGETS {
            let votes: Vec<f64> = rows.iter().map(|(_, l)| l.votes(target) as f64).collect();
            cells.push(match pearson(&votes, &counts) {
                Ok(r) => Some(r),
                Err(e) => {
                    report.notes.push(format!("gaps<={t}s vs {} votes: {e}", target.as_str()));
                    None
                }
            });
        }
        cells.extend([None, None, None]);
        report.push(format!("gaps<={t}s"), cells);
    }
    for target in TARGETS {
        let (pos, neg): (Vec<_>, Vec<_>) = rows.iter().partition(|(_, l)| l.is_positive(target));
        let pos: Vec<f64> = pos.iter().map(|(f, _)| f.fraction_within_hour).collect();
        let neg: Vec<f64> = neg.iter().map(|(f, _)| f.fraction_within_hour).collect();
        let what = format!("within_1h:{}", target.as_str());
        let p = welch_cell(&mut report, &what, &pos, &neg);
        report.push(what, vec![None, None, mean(&pos), mean(&neg), p]);
    }
    Ok(report)
}

const GRAPH_PROPERTIES: [&str; 4] = ["likes", "media_count", "following", "followers"];

fn graph_values(s: &MediaSession) -> [f64; 4] {
    let o = &s.owner_stats;
    [o.likes as f64, o.media_count as f64, o.following as f64, o.followers as f64]
}

/// Mean owner statistics per class, the negative/positive ratio of means
/// and a Welch p-value per property.
pub fn graph_property_table(corpus: &Corpus, labels: &LabelSet) -> Report {
    let mut report = Report::new("graph_properties", &GRAPH_PROPERTIES);
    let rows = labelled(corpus, labels);
    for target in TARGETS {
        let name = target.as_str();
        let (pos, neg): (Vec<_>, Vec<_>) = rows.iter().partition(|(_, l)| l.is_positive(target));
        let column = |set: &[&(&MediaSession, &AggregatedLabel)], j: usize| -> Vec<f64> {
            set.iter().map(|(s, _)| graph_values(s)[j]).collect()
        };
        let pos_refs: Vec<_> = pos.iter().collect();
        let neg_refs: Vec<_> = neg.iter().collect();
        let mut means = [Vec::new(), Vec::new()];
        let mut ratio = Vec::new();
        let mut p = Vec::new();
        for j in 0..4 {
            let a = column(&pos_refs, j);
            let b = column(&neg_refs, j);
            let (ma, mb) = (mean(&a), mean(&b));
            means[0].push(ma);
            means[1].push(mb);
            ratio.push(match (ma, mb) {
                (Some(x), Some(y)) if x != 0.0 => Some(y / x),
                _ => None,
            });
            p.push(welch_cell(&mut report, &format!("{name} {}", GRAPH_PROPERTIES[j]), &a, &b));
        }
        if pos.is_empty() || neg.is_empty() {
            report.notes.push(format!("{name}: a class is empty"));
        }
        let [mp, mn] = means;
        report.push(name, mp);
        report.push(format!("non_{name}"), mn);
        report.push(format!("ratio_non_{name}_over_{name}"), ratio);
        report.push(format!("p_{name}"), p);
    }
    report
}

/// Per category: mean raw hit count in positive and negative sessions,
/// their ratio and a Welch p-value.
pub fn liwc_ratio_report(corpus: &Corpus, labels: &LabelSet, cats: &CategoryLexicon, target: Target) -> Report {
    let mut report = Report::new("liwc_ratios", &["mean_positive", "mean_negative", "ratio", "p"]);
    let rows = labelled(corpus, labels);
    let counts: Vec<_> = rows
        .iter()
        .map(|(s, l)| (category_counts(s, cats), l.is_positive(target)))
        .collect();
    let has_pos = counts.iter().any(|(_, p)| *p);
    let has_neg = counts.iter().any(|(_, p)| !*p);
    if !has_pos || !has_neg {
        report.notes.push(format!("{}: a class is empty", target.as_str()));
    }
    for name in cats.names() {
        let pick = |positive: bool| -> Vec<f64> {
            counts
                .iter()
                .filter(|(_, p)| *p == positive)
                .map(|(c, _)| c.counts[name] as f64)
                .collect()
        };
        let (a, b) = (pick(true), pick(false));
        let (ma, mb) = (mean(&a), mean(&b));
        let ratio = match (ma, mb) {
            (Some(x), Some(y)) if y != 0.0 => Some(x / y),
            (Some(_), Some(_)) => {
                report.notes.push(format!("{name}: negative-class mean is 0, ratio undefined"));
                None
            }
            _ => None,
        };
        let p = welch_cell(&mut report, name, &a, &b);
        report.push(name, vec![ma, mb, ratio, p]);
    }
    report
}

/// Per image category: session count, share of all sessions, and the share
/// of that category's sessions labelled bullying and aggression.
pub fn image_category_report(
    corpus: &Corpus,
    labels: &LabelSet,
    image_labels: &BTreeMap<String, ImageLabel>,
) -> Report {
    let mut report = Report::new(
        "image_categories",
        &["sessions", "fraction_of_all", "bullying_fraction", "aggression_fraction"],
    );
    let mut per = vec![(0usize, 0usize, 0usize); ImageCategory::ALL.len()];
    let mut total = 0;
    let mut missing = 0;
    for (s, l) in labelled(corpus, labels) {
        let Some(img) = image_labels.get(&s.session_id) else {
            missing += 1;
            continue;
        };
        total += 1;
        let e = &mut per[img.category.index()];
        e.0 += 1;
        e.1 += usize::from(l.is_bullying);
        e.2 += usize::from(l.is_aggression);
    }
    for (cat, (n, b, a)) in ImageCategory::ALL.iter().zip(&per) {
        let frac = |k: usize| (*n > 0).then(|| k as f64 / *n as f64);
        report.push(
            cat.as_str(),
            vec![
                Some(*n as f64),
                (*n > 0 && total > 0).then(|| *n as f64 / total as f64),
                frac(*b),
                frac(*a),
            ],
        );
    }
    if missing > 0 {
        report.notes.push(format!("{missing} labelled sessions lack an image label"));
    }
    report
}
