//! From-scratch classifiers: Pegasos linear SVM, L2 logistic regression,
//! multinomial MaxEnt and mixed Gaussian/Bernoulli Naive Bayes.

mod bayes;
mod linear;

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{ComponentKind, FeatureSchema, FeatureVector};
use crate::numerics::matrix::dot;
use crate::util::write_atomic;

pub use bayes::{train_naive_bayes, NaiveBayesParams, BERNOULLI_ALPHA, VARIANCE_FLOOR};
pub use linear::{
    logistic_objective, maxent_objective, svm_objective, train_logistic, train_maxent, train_svm,
    train_svm_traced,
};

const MODEL_FORMAT: &str = "bullyscope-model";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Svm,
    Logistic,
    Maxent,
    NaiveBayes,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Svm => "svm",
            ModelKind::Logistic => "logistic",
            ModelKind::Maxent => "maxent",
            ModelKind::NaiveBayes => "naive_bayes",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "svm" | "linear_svm" => Ok(ModelKind::Svm),
            "logistic" | "logreg" | "logistic_regression" => Ok(ModelKind::Logistic),
            "maxent" => Ok(ModelKind::Maxent),
            "naive_bayes" | "nb" | "bayes" => Ok(ModelKind::NaiveBayes),
            other => Err(Error::invalid(format!("unknown classifier {other:?}"))),
        }
    }
}

/// Training hyperparameters, echoed into every model file.
///
/// Gradient-based learners use step `learning_rate / sqrt(1 + epoch)`; the
/// SVM uses the Pegasos step `1 / (lambda * t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Standardize continuous components with training-set mean and spread.
    pub standardize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 1e-4,
            epochs: 100,
            seed: 0,
            batch_size: 32,
            learning_rate: 0.5,
            standardize: true,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(Error::invalid(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::invalid("epochs and batch_size must be positive"));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::invalid("learning_rate must be positive"));
        }
        Ok(())
    }
}

/// Labelled training rows under one feature schema. Labels are class ids;
/// binary learners treat class 1 as positive.
#[derive(Debug, Clone, Copy)]
pub struct Dataset<'a> {
    pub x: &'a [Vec<f64>],
    pub y: &'a [usize],
    pub schema: &'a FeatureSchema,
}

impl<'a> Dataset<'a> {
    pub fn new(x: &'a [Vec<f64>], y: &'a [usize], schema: &'a FeatureSchema) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::invalid(format!("{} rows but {} labels", x.len(), y.len())));
        }
        if x.is_empty() {
            return Err(Error::invalid("empty training set"));
        }
        let d = schema.len();
        for (i, row) in x.iter().enumerate() {
            if row.len() != d {
                return Err(Error::invalid(format!(
                    "row {i} has {} features, schema has {d}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::numeric(format!("row {i} has non-finite features")));
            }
        }
        Ok(Dataset { x, y, schema })
    }

    pub fn dim(&self) -> usize {
        self.schema.len()
    }

    /// Number of classes (max label + 1); fails unless at least two are present.
    fn class_count(&self) -> Result<usize> {
        let n = self.y.iter().copied().max().unwrap_or(0) + 1;
        let mut present = vec![false; n];
        for &c in self.y {
            present[c] = true;
        }
        if present.iter().filter(|&&p| p).count() < 2 {
            return Err(Error::data("training data contains a single class"));
        }
        Ok(n)
    }

    fn binary(&self) -> Result<()> {
        if self.y.iter().any(|&c| c > 1) {
            return Err(Error::invalid("binary classifier needs labels in {0, 1}"));
        }
        self.class_count().map(|_| ())
    }
}

/// Uniform-width dense schema, handy for raw numeric problems.
pub fn dense_schema(dim: usize, kind: ComponentKind) -> FeatureSchema {
    FeatureSchema::new(vec![crate::features::FeatureGroup {
        name: "dense".into(),
        len: dim,
        kind,
        digest: String::new(),
    }])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Parameters {
    /// One weight row per scored class. Binary SVM and logistic models
    /// store only the positive-class row.
    Linear { weights: Vec<Vec<f64>>, bias: Vec<f64> },
    NaiveBayes(NaiveBayesParams),
}

/// Affine input map `(x - shift) / scale`, fitted on training rows.
///
/// Continuous components are centered. Text groups share one scale, the
/// root mean squared distance of the block from its centroid, so their
/// internal geometry is kept; other continuous components get their own
/// standard deviation. Binary components pass through unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaling {
    pub fn fit(x: &[Vec<f64>], schema: &FeatureSchema) -> Scaling {
        let d = schema.len();
        let n = x.len() as f64;
        let mut shift = vec![0.0; d];
        let mut scale = vec![1.0; d];
        let mut var = vec![0.0; d];
        for j in 0..d {
            let mean = x.iter().map(|r| r[j]).sum::<f64>() / n;
            shift[j] = mean;
            var[j] = x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        }
        let mut start = 0;
        for g in &schema.groups {
            let range = start..start + g.len;
            start += g.len;
            if g.kind == ComponentKind::Binary {
                range.for_each(|j| shift[j] = 0.0);
                continue;
            }
            if g.is_text() {
                let spread = var[range.clone()].iter().sum::<f64>().sqrt();
                if spread > 1e-12 {
                    range.for_each(|j| scale[j] = spread);
                }
            } else {
                for j in range {
                    if var[j].sqrt() > 1e-12 {
                        scale[j] = var[j].sqrt();
                    }
                }
            }
        }
        Scaling { shift, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.shift.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kind: ModelKind,
    pub n_classes: usize,
    pub params: Parameters,
    /// Applied to inputs before the parameters; `None` means raw inputs.
    pub scaling: Option<Scaling>,
    pub schema_fingerprint: String,
    pub config: TrainConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub class: usize,
    /// SVM margin, positive-class probability (logistic) or the winning
    /// class probability (MaxEnt, Naive Bayes).
    pub score: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        match &self.params {
            Parameters::Linear { weights, .. } => weights.first().map_or(0, Vec::len),
            Parameters::NaiveBayes(nb) => nb.kinds.len(),
        }
    }

    /// Raw scores without a fingerprint check: one margin for binary
    /// linear models, per-class scores (or log joint probabilities) otherwise.
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.dim()
            )));
        }
        let scaled;
        let x = match &self.scaling {
            Some(s) => {
                scaled = s.apply(x);
                &scaled[..]
            }
            None => x,
        };
        Ok(match &self.params {
            Parameters::Linear { weights, bias } => weights
                .iter()
                .zip(bias)
                .map(|(w, b)| dot(w, x) + b)
                .collect(),
            Parameters::NaiveBayes(nb) => nb.log_joint(x),
        })
    }

    pub fn predict_values(&self, x: &[f64]) -> Result<Prediction> {
        let scores = self.decision_values(x)?;
        Ok(match self.kind {
            ModelKind::Svm => Prediction {
                class: usize::from(scores[0] > 0.0),
                score: scores[0],
            },
            ModelKind::Logistic => Prediction {
                class: usize::from(scores[0] > 0.0),
                score: sigmoid(scores[0]),
            },
            ModelKind::Maxent | ModelKind::NaiveBayes => {
                let probs = softmax(&scores);
                let class = argmax(&scores);
                Prediction {
                    class,
                    score: probs[class],
                }
            }
        })
    }

    fn check(&self, x: &FeatureVector) -> Result<()> {
        if x.schema_fingerprint != self.schema_fingerprint {
            return Err(Error::Schema {
                expected: self.schema_fingerprint.clone(),
                found: x.schema_fingerprint.clone(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = ModelDocument {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            model: self.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument =
            serde_json::from_str(text).map_err(|e| Error::data(format!("model file: {e}")))?;
        if doc.format != MODEL_FORMAT || doc.version != MODEL_VERSION {
            return Err(Error::data(format!(
                "unsupported model document {} v{}",
                doc.format, doc.version
            )));
        }
        Ok(doc.model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_json().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        LinearModel::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    model: LinearModel,
}

/// Predicted class and score; the vector must come from the model's schema.
pub fn predict(model: &LinearModel, x: &FeatureVector) -> Result<Prediction> {
    model.check(x)?;
    model.predict_values(&x.values)
}

pub fn decision_function(model: &LinearModel, x: &FeatureVector) -> Result<Vec<f64>> {
    model.check(x)?;
    model.decision_values(&x.values)
}

/// Trains any supported classifier, standardizing inputs first when the
/// config asks for it. The per-kind trainers work on raw inputs.
pub fn train(kind: ModelKind, data: &Dataset<'_>, config: &TrainConfig) -> Result<LinearModel> {
    let scaling = config
        .standardize
        .then(|| Scaling::fit(data.x, data.schema));
    let scaled: Vec<Vec<f64>>;
    let data = match &scaling {
        Some(s) => {
            scaled = data.x.iter().map(|r| s.apply(r)).collect();
            Dataset { x: &scaled, ..*data }
        }
        None => *data,
    };
    let mut model = match kind {
        ModelKind::Svm => train_svm(&data, config),
        ModelKind::Logistic => train_logistic(&data, config),
        ModelKind::Maxent => train_maxent(&data, config),
        ModelKind::NaiveBayes => train_naive_bayes(&data, config),
    }?;
    model.scaling = scaling;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(kind: ModelKind, w: Vec<f64>, b: f64) -> LinearModel {
        LinearModel {
            kind,
            n_classes: 2,
            params: Parameters::Linear {
                weights: vec![w],
                bias: vec![b],
            },
            scaling: None,
            schema_fingerprint: "fp".into(),
            config: TrainConfig::default(),
        }
    }

    fn fv(values: Vec<f64>) -> FeatureVector {
        FeatureVector {
            values,
            schema_fingerprint: "fp".into(),
        }
    }

    #[test]
    fn svm_margin() {
        let m = linear(ModelKind::Svm, vec![1.0, 0.0], 0.0);
        let p = predict(&m, &fv(vec![2.0, 5.0])).unwrap();
        assert_eq!(p.class, 1);
        assert_eq!(p.score, 2.0);
    }

    #[test]
    fn logistic_boundary_is_half() {
        let m = linear(ModelKind::Logistic, vec![1.0, -1.0], 0.0);
        let p = predict(&m, &fv(vec![3.0, 3.0])).unwrap();
        assert_eq!(p.score, 0.5);
    }

    #[test]
    fn fingerprint_mismatch() {
        let m = linear(ModelKind::Svm, vec![1.0], 0.0);
        let bad = FeatureVector {
            values: vec![1.0],
            schema_fingerprint: "other".into(),
        };
        assert!(matches!(predict(&m, &bad), Err(Error::Schema { .. })));
        assert!(matches!(decision_function(&m, &bad), Err(Error::Schema { .. })));
        assert!(m.decision_values(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("SVM".parse::<ModelKind>().unwrap(), ModelKind::Svm);
        assert_eq!("naive-bayes".parse::<ModelKind>().unwrap(), ModelKind::NaiveBayes);
        assert!("tree".parse::<ModelKind>().is_err());
    }

    #[test]
    fn dataset_validation() {
        let schema = dense_schema(2, ComponentKind::Continuous);
        let x = vec![vec![1.0, 2.0]];
        assert!(Dataset::new(&x, &[0, 1], &schema).is_err());
        let bad = vec![vec![1.0]];
        assert!(Dataset::new(&bad, &[0], &schema).is_err());
        let one_class = vec![vec![1.0, 2.0], vec![2.0, 1.0]];
        let d = Dataset::new(&one_class, &[1, 1], &schema).unwrap();
        assert!(train(ModelKind::Svm, &d, &TrainConfig::default()).is_err());
        assert!(train(ModelKind::NaiveBayes, &d, &TrainConfig::default()).is_err());
    }
}
