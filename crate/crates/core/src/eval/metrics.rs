use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Metrics {
    /// Zero denominators give 0 rather than NaN.
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Metrics {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics { precision, recall, f1 }
    }

    /// Unweighted mean over folds.
    pub fn mean(items: &[Metrics]) -> Metrics {
        if items.is_empty() {
            return Metrics::default();
        }
        let n = items.len() as f64;
        Metrics {
            precision: items.iter().map(|m| m.precision).sum::<f64>() / n,
            recall: items.iter().map(|m| m.recall).sum::<f64>() / n,
            f1: items.iter().map(|m| m.f1).sum::<f64>() / n,
        }
    }
}

/// Precision, recall and F1 of `positive`.
pub fn metrics<T: PartialEq>(predicted: &[T], actual: &[T], positive: &T) -> Result<Metrics> {
    if predicted.len() != actual.len() || predicted.is_empty() {
        return Err(Error::invalid(format!(
            "metrics need equal non-empty inputs, got {} and {}",
            predicted.len(),
            actual.len()
        )));
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (p, a) in predicted.iter().zip(actual) {
        match (p == positive, a == positive) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(Metrics::from_counts(tp, fp, fn_))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hand_counts() {
        let actual = [1, 1, 1, 1, 1, 0, 0];
        let predicted = [1, 1, 1, 0, 0, 1, 0];
        let m = metrics(&predicted, &actual, &1).unwrap();
        assert_eq!(m.precision, 0.75);
        assert_eq!(m.recall, 0.6);
        assert_abs_diff_eq!(m.f1, 2.0 * 0.75 * 0.6 / 1.35, epsilon = 1e-15);
        assert_abs_diff_eq!(m.f1, 0.6667, epsilon = 1e-4);
    }

    #[test]
    fn conventions() {
        let all = metrics(&[true, false], &[true, false], &true).unwrap();
        assert_eq!((all.precision, all.recall, all.f1), (1.0, 1.0, 1.0));
        let none = metrics(&[false, false], &[true, false], &true).unwrap();
        assert_eq!((none.precision, none.recall, none.f1), (0.0, 0.0, 0.0));
        assert!(metrics::<bool>(&[], &[], &true).is_err());
    }
}
