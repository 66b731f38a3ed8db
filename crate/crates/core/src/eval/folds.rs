use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{seeded_rng, StreamRng};

pub const DEFAULT_FOLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub assignments: BTreeMap<String, usize>,
    pub warnings: Vec<String>,
}

impl FoldPlan {
    pub fn fold_of(&self, id: &str) -> Option<usize> {
        self.assignments.get(id).copied()
    }

    pub fn test_ids(&self, fold: usize) -> Vec<&str> {
        self.assignments
            .iter()
            .filter(|(_, &f)| f == fold)
            .map(|(id, _)| id.as_str())
            .collect()
    }

    pub fn train_ids(&self, fold: usize) -> Vec<&str> {
        self.assignments
            .iter()
            .filter(|(_, &f)| f != fold)
            .map(|(id, _)| id.as_str())
            .collect()
    }
}

/// Splits labelled ids into `k` class-stratified folds.
///
/// Each class is shuffled and dealt round-robin; the dealing position carries
/// over from one class to the next, so fold sizes also stay within one.
/// The plan depends only on the set of `(id, label)` pairs, not their order.
pub fn stratified_kfold(labels: &[(String, bool)], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::invalid(format!("need at least 2 folds, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::invalid(format!("{k} folds for {} sessions", labels.len())));
    }
    let mut rng = seeded_rng(seed, "eval/kfold");
    let mut assignments = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut next = 0;
    for class in [false, true] {
        let mut ids: Vec<&str> = labels
            .iter()
            .filter(|(_, l)| *l == class)
            .map(|(id, _)| id.as_str())
            .collect();
        ids.sort_unstable();
        if ids.len() < k {
            let msg = format!("class {class} has {} sessions for {k} folds", ids.len());
            log::warn!("{msg}");
            warnings.push(msg);
        }
        ids.shuffle(&mut rng);
        for id in ids {
            if assignments.insert(id.to_string(), next).is_some() {
                return Err(Error::data(format!("duplicate session id {id}")));
            }
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan {
        k,
        seed,
        assignments,
        warnings,
    })
}

/// Returns `items` followed by minority items drawn uniformly with
/// replacement until both classes are equally frequent.
pub fn oversample_minority<T: Clone>(items: &[T], labels: &[bool], seed: u64) -> Result<Vec<T>> {
    oversample_minority_with(items, labels, &mut seeded_rng(seed, "eval/oversample"))
}

pub fn oversample_minority_with<T: Clone>(items: &[T], labels: &[bool], rng: &mut StreamRng) -> Result<Vec<T>> {
    if items.len() != labels.len() {
        return Err(Error::invalid("items and labels differ in length"));
    }
    let pos: Vec<&T> = items.iter().zip(labels).filter(|(_, &l)| l).map(|(t, _)| t).collect();
    let neg: Vec<&T> = items.iter().zip(labels).filter(|(_, &l)| !l).map(|(t, _)| t).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::data("cannot oversample a single-class training fold"));
    }
    let (minority, deficit) = if pos.len() < neg.len() {
        (&pos, neg.len() - pos.len())
    } else {
        (&neg, pos.len() - neg.len())
    };
    let mut out = items.to_vec();
    out.extend((0..deficit).map(|_| (*minority.choose(rng).expect("non-empty")).clone()));
    Ok(out)
}
