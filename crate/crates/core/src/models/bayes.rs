use serde::{Deserialize, Serialize};

use super::{Dataset, LinearModel, ModelKind, Parameters, TrainConfig};
use crate::error::Result;
use crate::features::ComponentKind;

pub const VARIANCE_FLOOR: f64 = 1e-9;
pub const BERNOULLI_ALPHA: f64 = 1.0;

/// Per-class parameters. Continuous components use `means`/`variances`,
/// binary components use `log_present`/`log_absent` (value > 0 counts as present).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesParams {
    pub kinds: Vec<ComponentKind>,
    pub log_priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
    pub log_present: Vec<Vec<f64>>,
    pub log_absent: Vec<Vec<f64>>,
}

impl NaiveBayesParams {
    pub fn log_joint(&self, x: &[f64]) -> Vec<f64> {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        (0..self.log_priors.len())
            .map(|c| {
                let mut s = self.log_priors[c];
                for (j, &v) in x.iter().enumerate() {
                    s += match self.kinds[j] {
                        ComponentKind::Binary => {
                            if v > 0.0 {
                                self.log_present[c][j]
                            } else {
                                self.log_absent[c][j]
                            }
                        }
                        ComponentKind::Continuous => {
                            let var = self.variances[c][j];
                            let dev = v - self.means[c][j];
                            -0.5 * (ln_2pi + var.ln()) - dev * dev / (2.0 * var)
                        }
                    };
                }
                s
            })
            .collect()
    }
}

pub fn train_naive_bayes(data: &Dataset<'_>, config: &TrainConfig) -> Result<LinearModel> {
    let classes = data.class_count()?;
    let kinds = data.schema.component_kinds();
    let d = kinds.len();
    let n = data.x.len() as f64;
    let mut counts = vec![0usize; classes];
    let mut sums = vec![vec![0.0; d]; classes];
    let mut present = vec![vec![0.0; d]; classes];
    for (xi, &c) in data.x.iter().zip(data.y) {
        counts[c] += 1;
        for j in 0..d {
            sums[c][j] += xi[j];
            if xi[j] > 0.0 {
                present[c][j] += 1.0;
            }
        }
    }
    let means: Vec<Vec<f64>> = (0..classes)
        .map(|c| sums[c].iter().map(|s| if counts[c] > 0 { s / counts[c] as f64 } else { 0.0 }).collect())
        .collect();
    let mut sq = vec![vec![0.0; d]; classes];
    for (xi, &c) in data.x.iter().zip(data.y) {
        for j in 0..d {
            let dev = xi[j] - means[c][j];
            sq[c][j] += dev * dev;
        }
    }
    let variances = (0..classes)
        .map(|c| {
            sq[c]
                .iter()
                .map(|s| (if counts[c] > 0 { s / counts[c] as f64 } else { 0.0 }).max(VARIANCE_FLOOR))
                .collect()
        })
        .collect();
    let mut log_present = vec![vec![0.0; d]; classes];
    let mut log_absent = vec![vec![0.0; d]; classes];
    for c in 0..classes {
        let denom = counts[c] as f64 + 2.0 * BERNOULLI_ALPHA;
        for j in 0..d {
            let p = (present[c][j] + BERNOULLI_ALPHA) / denom;
            log_present[c][j] = p.ln();
            log_absent[c][j] = (1.0 - p).ln();
        }
    }
    // an absent class id gets zero prior mass and can never win
    let log_priors = counts.iter().map(|&k| (k as f64 / n).ln()).collect();
    Ok(LinearModel {
        kind: ModelKind::NaiveBayes,
        n_classes: classes,
        params: Parameters::NaiveBayes(NaiveBayesParams {
            kinds,
            log_priors,
            means,
            variances,
            log_present,
            log_absent,
        }),
        scaling: None,
        schema_fingerprint: data.schema.fingerprint.clone(),
        config: config.clone(),
    })
}
