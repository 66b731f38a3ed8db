use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::folds::{oversample_minority_with, stratified_kfold, FoldPlan, DEFAULT_FOLDS};
use super::metrics::metrics;
use super::report::{EvalReport, EvalRow, FoldMetrics};
use crate::corpus::{Corpus, MediaSession};
use crate::error::{Error, Result};
use crate::features::{prediction_config, FeatureConfig, FittedPipeline, LadderLevel, TextConfig};
use crate::labels::{ImageLabel, LabelSet, Target};
use crate::lexicon::Lexicon;
use crate::models::{train, Dataset, ModelKind, TrainConfig};
use crate::numerics::seeded_rng;

/// Settings shared by both protocols.
#[derive(Debug, Clone)]
struct Protocol<'a> {
    classifier: ModelKind,
    train: &'a TrainConfig,
    stopwords: &'a Lexicon,
    seed: u64,
    oversample: bool,
}

#[derive(Debug, Clone)]
pub struct DetectionConfig {
    pub features: FeatureConfig,
    pub classifier: ModelKind,
    pub train: TrainConfig,
    pub target: Target,
    pub folds: usize,
    pub seed: u64,
    pub oversample: bool,
    /// Permute labels before splitting (null-model control).
    pub shuffle_labels: bool,
    pub stopwords: Lexicon,
    /// Worker threads for fold evaluation; 0 picks the rayon default.
    /// Never affects results.
    pub jobs: usize,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            features: FeatureConfig::detection_default(),
            classifier: ModelKind::Svm,
            train: TrainConfig::default(),
            target: Target::Bullying,
            folds: DEFAULT_FOLDS,
            seed: 0,
            oversample: true,
            shuffle_labels: false,
            stopwords: Lexicon::bundled_stopwords(),
            jobs: 1,
        }
    }
}

impl DetectionConfig {
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("classifier".into(), self.classifier.to_string());
        m.insert("target".into(), self.target.as_str().into());
        m.insert("folds".into(), self.folds.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("oversample".into(), self.oversample.to_string());
        m.insert("shuffle_labels".into(), self.shuffle_labels.to_string());
        echo_features(&self.features, &mut m);
        echo_train(&self.train, &mut m);
        echo_stopwords(&self.stopwords, &mut m);
        m
    }
}

#[derive(Debug, Clone)]
pub struct PredictionConfig {
    pub level: LadderLevel,
    pub k_comments: usize,
    pub text: TextConfig,
    pub classifier: ModelKind,
    pub train: TrainConfig,
    pub target: Target,
    pub folds: usize,
    pub seed: u64,
    pub oversample: bool,
    pub stopwords: Lexicon,
    pub jobs: usize,
}

impl Default for PredictionConfig {
    fn default() -> Self {
        PredictionConfig {
            level: LadderLevel::Comments,
            k_comments: 15,
            text: TextConfig::default(),
            classifier: ModelKind::Maxent,
            train: TrainConfig::default(),
            target: Target::Bullying,
            folds: DEFAULT_FOLDS,
            seed: 0,
            oversample: true,
            stopwords: Lexicon::bundled_stopwords(),
            jobs: 1,
        }
    }
}

impl PredictionConfig {
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("level".into(), self.level.as_str().into());
        m.insert("k_comments".into(), self.k_comments.to_string());
        m.insert("classifier".into(), self.classifier.to_string());
        m.insert("target".into(), self.target.as_str().into());
        m.insert("folds".into(), self.folds.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("oversample".into(), self.oversample.to_string());
        echo_text(&self.text, &mut m);
        echo_train(&self.train, &mut m);
        echo_stopwords(&self.stopwords, &mut m);
        m
    }
}

fn echo_text(t: &TextConfig, m: &mut BTreeMap<String, String>) {
    m.insert("text.bigrams".into(), t.use_bigrams.to_string());
    m.insert("text.stopwords".into(), t.remove_stopwords.to_string());
    m.insert("text.normalize".into(), t.normalize.to_string());
    m.insert("text.min_df".into(), t.min_df.to_string());
    m.insert(
        "text.lsa_rank".into(),
        t.lsa_rank.map_or_else(|| "off".to_string(), |k| k.to_string()),
    );
    m.insert("text.caption".into(), t.include_caption.to_string());
    m.insert("text.comments".into(), t.include_comments.to_string());
    m.insert(
        "text.comment_limit".into(),
        t.comment_limit.map_or_else(|| "all".to_string(), |k| k.to_string()),
    );
}

fn echo_features(f: &FeatureConfig, m: &mut BTreeMap<String, String>) {
    match &f.text {
        Some(t) => echo_text(t, m),
        None => {
            m.insert("text".into(), "off".into());
        }
    }
    m.insert("features.social".into(), f.social.to_string());
    m.insert(
        "features.temporal".into(),
        f.temporal.as_ref().map_or_else(|| "off".to_string(), |t| format!("{t:?}")),
    );
    m.insert("features.image".into(), f.image.to_string());
    m.insert("features.image_multi_hot".into(), f.image_multi_hot.to_string());
    m.insert("features.post_time".into(), f.post_time.to_string());
}

fn echo_train(t: &TrainConfig, m: &mut BTreeMap<String, String>) {
    m.insert("train.lambda".into(), t.lambda.to_string());
    m.insert("train.epochs".into(), t.epochs.to_string());
    m.insert("train.seed".into(), t.seed.to_string());
    m.insert("train.batch_size".into(), t.batch_size.to_string());
    m.insert("train.learning_rate".into(), t.learning_rate.to_string());
}

fn echo_stopwords(l: &Lexicon, m: &mut BTreeMap<String, String>) {
    m.insert("stopwords".into(), format!("{} ({} entries)", l.name, l.entries.len()));
}

/// What one fold fitted and how it scored; exposed for leakage audits.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldArtifacts {
    pub fold: usize,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    /// Fitted vocabulary, when text features are on.
    pub vocabulary: Option<Vec<String>>,
    pub schema_fingerprint: String,
    /// Positive share of the training rows the classifier saw.
    pub train_positive_rate: f64,
    pub metrics: FoldMetrics,
    pub notes: Vec<String>,
}

/// Labelled sessions in corpus order, with notes on skipped ones.
fn labelled<'a>(
    corpus: &'a Corpus,
    labels: &LabelSet,
    target: Target,
) -> Result<(Vec<&'a MediaSession>, Vec<bool>, Vec<String>)> {
    let mut sessions = Vec::new();
    let mut y = Vec::new();
    for s in &corpus.sessions {
        if let Some(l) = labels.get(&s.session_id) {
            sessions.push(s);
            y.push(l.is_positive(target));
        }
    }
    if sessions.is_empty() {
        return Err(Error::data("no corpus session has a label"));
    }
    let mut notes = Vec::new();
    let skipped = corpus.sessions.len() - sessions.len();
    if skipped > 0 {
        notes.push(format!("{skipped} unlabelled sessions skipped"));
    }
    let pos = y.iter().filter(|&&p| p).count();
    notes.push(format!(
        "{} sessions, {pos} positive (rate {})",
        y.len(),
        pos as f64 / y.len() as f64
    ));
    Ok((sessions, y, notes))
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))
}

#[allow(clippy::too_many_arguments)]
fn run_fold(
    fold: usize,
    plan: &FoldPlan,
    sessions: &[&MediaSession],
    y: &[bool],
    images: Option<&BTreeMap<String, ImageLabel>>,
    features: &FeatureConfig,
    protocol: &Protocol<'_>,
    stream: &str,
) -> Result<FoldArtifacts> {
    let (mut train_idx, mut test_idx) = (Vec::new(), Vec::new());
    for (i, s) in sessions.iter().enumerate() {
        if plan.fold_of(&s.session_id) == Some(fold) {
            test_idx.push(i);
        } else {
            train_idx.push(i);
        }
    }
    let train_sessions: Vec<&MediaSession> = train_idx.iter().map(|&i| sessions[i]).collect();
    let pipeline = FittedPipeline::fit(features, &train_sessions, protocol.stopwords, protocol.seed)?;
    let image_of = |s: &MediaSession| images.and_then(|m| m.get(&s.session_id));
    let rows = |idx: &[usize]| -> Result<Vec<Vec<f64>>> {
        idx.iter()
            .map(|&i| pipeline.transform(sessions[i], image_of(sessions[i])).map(|v| v.values))
            .collect()
    };
    let x_train = rows(&train_idx)?;
    let y_train: Vec<bool> = train_idx.iter().map(|&i| y[i]).collect();
    let order: Vec<usize> = (0..train_idx.len()).collect();
    let order = if protocol.oversample {
        let mut rng = seeded_rng(protocol.seed, &format!("{stream}/fold{fold}/oversample"));
        oversample_minority_with(&order, &y_train, &mut rng)?
    } else {
        order
    };
    let xs: Vec<Vec<f64>> = order.iter().map(|&i| x_train[i].clone()).collect();
    let ys: Vec<usize> = order.iter().map(|&i| usize::from(y_train[i])).collect();
    let data = Dataset::new(&xs, &ys, pipeline.schema())?;
    let model = train(protocol.classifier, &data, protocol.train)?;

    let x_test = rows(&test_idx)?;
    let predicted = x_test
        .iter()
        .map(|x| model.predict_values(x).map(|p| p.class == 1))
        .collect::<Result<Vec<bool>>>()?;
    let actual: Vec<bool> = test_idx.iter().map(|&i| y[i]).collect();
    let m = metrics(&predicted, &actual, &true)?;
    let ids = |idx: &[usize]| idx.iter().map(|&i| sessions[i].session_id.clone()).collect();
    Ok(FoldArtifacts {
        fold,
        train_ids: ids(&train_idx),
        test_ids: ids(&test_idx),
        vocabulary: pipeline.vocabulary().map(|v| v.terms().to_vec()),
        schema_fingerprint: pipeline.schema().fingerprint.clone(),
        train_positive_rate: ys.iter().sum::<usize>() as f64 / ys.len() as f64,
        metrics: FoldMetrics {
            fold,
            n_train: train_idx.len(),
            n_train_balanced: xs.len(),
            n_test: test_idx.len(),
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
        },
        notes: pipeline.notes().iter().map(|n| format!("fold {fold}: {n}")).collect(),
    })
}

#[allow(clippy::too_many_arguments)]
fn run_all_folds(
    plan: &FoldPlan,
    sessions: &[&MediaSession],
    y: &[bool],
    images: Option<&BTreeMap<String, ImageLabel>>,
    features: &FeatureConfig,
    protocol: &Protocol<'_>,
    stream: &str,
    jobs: usize,
) -> Result<Vec<FoldArtifacts>> {
    pool(jobs)?.install(|| {
        (0..plan.k)
            .into_par_iter()
            .map(|f| run_fold(f, plan, sessions, y, images, features, protocol, stream))
            .collect()
    })
}

fn plan_for(sessions: &[&MediaSession], y: &[bool], k: usize, seed: u64) -> Result<FoldPlan> {
    let pairs: Vec<(String, bool)> = sessions
        .iter()
        .zip(y)
        .map(|(s, &l)| (s.session_id.clone(), l))
        .collect();
    stratified_kfold(&pairs, k, seed)
}

/// Runs the detection protocol and returns each fold's artifacts plus notes.
pub fn run_detection_folds(
    corpus: &Corpus,
    labels: &LabelSet,
    config: &DetectionConfig,
) -> Result<(Vec<FoldArtifacts>, Vec<String>)> {
    let (sessions, mut y, mut notes) = labelled(corpus, labels, config.target)?;
    if config.shuffle_labels {
        y.shuffle(&mut seeded_rng(config.seed, "eval/shuffle-labels"));
        notes.push("labels shuffled (null control)".into());
    }
    if config.features.image {
        return Err(Error::invalid("detection features do not use image labels"));
    }
    let plan = plan_for(&sessions, &y, config.folds, config.seed)?;
    notes.extend(plan.warnings.iter().cloned());
    let protocol = Protocol {
        classifier: config.classifier,
        train: &config.train,
        stopwords: &config.stopwords,
        seed: config.seed,
        oversample: config.oversample,
    };
    let folds = run_all_folds(&plan, &sessions, &y, None, &config.features, &protocol, "eval/detect", config.jobs)?;
    for f in &folds {
        notes.extend(f.notes.iter().cloned());
    }
    Ok((folds, notes))
}

pub fn run_detection_experiment(corpus: &Corpus, labels: &LabelSet, config: &DetectionConfig) -> Result<EvalReport> {
    let (folds, notes) = run_detection_folds(corpus, labels, config)?;
    Ok(EvalReport {
        experiment: "detection".into(),
        config: config.echo(),
        rows: vec![EvalRow::new(
            "detection",
            folds.into_iter().map(|f| f.metrics).collect(),
        )],
        notes,
    })
}

/// Evaluates every ladder rung up to `config.level` on one shared fold plan.
pub fn run_prediction_experiment(
    corpus: &Corpus,
    labels: &LabelSet,
    image_labels: &BTreeMap<String, ImageLabel>,
    config: &PredictionConfig,
) -> Result<EvalReport> {
    let (sessions, y, mut notes) = labelled(corpus, labels, config.target)?;
    if let Some(s) = sessions.iter().find(|s| !image_labels.contains_key(&s.session_id)) {
        return Err(Error::data(format!("missing image label for session {}", s.session_id)));
    }
    let plan = plan_for(&sessions, &y, config.folds, config.seed)?;
    notes.extend(plan.warnings.iter().cloned());
    let protocol = Protocol {
        classifier: config.classifier,
        train: &config.train,
        stopwords: &config.stopwords,
        seed: config.seed,
        oversample: config.oversample,
    };
    let mut rows = Vec::new();
    for level in config.level.up_to() {
        let features = prediction_config(level, config.k_comments, &config.text);
        let stream = format!("eval/predict/{}", level.as_str());
        let folds = run_all_folds(
            &plan,
            &sessions,
            &y,
            Some(image_labels),
            &features,
            &protocol,
            &stream,
            config.jobs,
        )?;
        for f in &folds {
            notes.extend(f.notes.iter().map(|n| format!("{level}: {n}")));
        }
        rows.push(EvalRow::new(level.as_str(), folds.into_iter().map(|f| f.metrics).collect()));
    }
    Ok(EvalReport {
        experiment: "prediction".into(),
        config: config.echo(),
        rows,
        notes,
    })
}
