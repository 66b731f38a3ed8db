use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use bullyscope_core::analysis::{self, Report, REPORT_NAMES};
use bullyscope_core::corpus::{
    filter_sessions, generate_synthetic_corpus, load_corpus, write_corpus, Corpus, ImageSignal, SyntheticSpec,
};
use bullyscope_core::eval::{
    oversample_minority, run_detection_experiment, run_prediction_experiment, DetectionConfig, PredictionConfig,
};
use bullyscope_core::features::{
    prediction_config, FeatureConfig, FittedPipeline, LadderLevel, TextConfig, DEFAULT_TEMPORAL_THRESHOLDS,
};
use bullyscope_core::labels::{
    aggregate_with_report, image_label_from_votes, label_set, load_aggregated_labels, load_image_label_records,
    load_label_records, resolve_image_labels, write_aggregated_labels, write_image_label_records,
    write_label_records, ImageLabel, LabelSet, Target,
};
use bullyscope_core::lexicon::{load_category_lexicon, load_lexicon, CategoryLexicon, Lexicon};
use bullyscope_core::models::{predict, train, Dataset, LinearModel, ModelKind, TrainConfig};
use bullyscope_core::util::write_atomic;
use bullyscope_core::Error;

use crate::args::*;

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Error::InvalidArgument(msg.into()).into()
}

/// Runs one command and returns its one-line summary.
pub fn run(cli: &Cli) -> Result<String> {
    let g = &cli.global;
    match &cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Filter(a) => filter(a),
        Command::Labels(a) => labels(a),
        Command::Analyze(a) => analyze(a),
        Command::Train(a) => train_cmd(a, g),
        Command::Eval(a) => match &a.protocol {
            EvalProtocol::Detect(d) => eval_detect(d, g),
            EvalProtocol::Predict(p) => eval_predict(p, g),
        },
        Command::Predict(a) => predict_cmd(a),
        Command::Synth(a) => synth(a, g),
    }
}

fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        return Err(Error::Data(format!("input file {} does not exist", path.display())).into());
    }
    Ok(())
}

fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(())
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => ensure_dir(p),
        _ => Ok(()),
    }
}

fn profanity(path: &Option<PathBuf>) -> Result<Lexicon> {
    match path {
        Some(p) => Ok(load_lexicon(p)?),
        None => Ok(Lexicon::bundled_profanity()),
    }
}

fn stopwords(path: &Option<PathBuf>) -> Result<Lexicon> {
    match path {
        Some(p) => Ok(load_lexicon(p)?),
        None => Ok(Lexicon::bundled_stopwords()),
    }
}

fn target(t: TargetArg) -> Target {
    match t {
        TargetArg::Bullying => Target::Bullying,
        TargetArg::Aggression => Target::Aggression,
    }
}

fn level(l: LevelArg) -> LadderLevel {
    match l {
        LevelArg::Image => LadderLevel::Image,
        LevelArg::User => LadderLevel::User,
        LevelArg::PostTime => LadderLevel::PostTime,
        LevelArg::Caption => LadderLevel::Caption,
        LevelArg::Comments => LadderLevel::Comments,
    }
}

fn classifier(c: ClassifierArg) -> ModelKind {
    match c {
        ClassifierArg::Svm => ModelKind::Svm,
        ClassifierArg::Logistic => ModelKind::Logistic,
        ClassifierArg::Maxent => ModelKind::Maxent,
        ClassifierArg::NaiveBayes => ModelKind::NaiveBayes,
    }
}

fn text_config(t: &TextArgs, include_caption: bool) -> Result<TextConfig> {
    if !(1..=2).contains(&t.ngrams) {
        return Err(usage(format!("--ngrams must be 1 or 2, got {}", t.ngrams)));
    }
    Ok(TextConfig {
        use_bigrams: t.ngrams == 2,
        remove_stopwords: t.stopwords.on(),
        normalize: t.normalize.on(),
        min_df: t.min_df,
        lsa_rank: (t.lsa_rank > 0).then_some(t.lsa_rank),
        include_caption,
        include_comments: true,
        comment_limit: None,
    })
}

fn train_config(m: &ModelArgs, seed: u64) -> TrainConfig {
    TrainConfig {
        lambda: m.lambda,
        epochs: m.epochs,
        seed,
        batch_size: m.batch_size,
        learning_rate: m.learning_rate,
        standardize: m.standardize.on(),
    }
}

fn load_labels(path: &Path) -> Result<LabelSet> {
    require_file(path)?;
    Ok(label_set(load_aggregated_labels(path)?))
}

/// Image labels from a record file, or from votes stored in the corpus.
fn image_labels(path: &Option<PathBuf>, corpus: &Corpus) -> Result<BTreeMap<String, ImageLabel>> {
    match path {
        Some(p) => {
            require_file(p)?;
            Ok(resolve_image_labels(&load_image_label_records(p)?)?)
        }
        None => {
            let mut out = BTreeMap::new();
            for s in corpus.sessions.iter().filter(|s| !s.image_category_votes.is_empty()) {
                out.insert(s.session_id.clone(), image_label_from_votes(&s.session_id, &s.image_category_votes)?);
            }
            Ok(out)
        }
    }
}

fn ingest(a: &IngestArgs) -> Result<String> {
    require_file(&a.corpus)?;
    let corpus = load_corpus(&a.corpus)?;
    for w in &corpus.ingest_warnings {
        log::warn!("{w}");
    }
    if let Some(out) = &a.out {
        ensure_parent(out)?;
        write_corpus(&corpus, out)?;
    }
    let comments: usize = corpus.sessions.iter().map(|s| s.comments.len()).sum();
    Ok(format!(
        "ingest: {} sessions, {comments} comments, {} warnings",
        corpus.len(),
        corpus.ingest_warnings.len()
    ))
}

fn filter(a: &FilterArgs) -> Result<String> {
    require_file(&a.corpus)?;
    let lexicon = profanity(&a.profanity)?;
    ensure_parent(&a.out)?;
    let corpus = load_corpus(&a.corpus)?;
    let kept = filter_sessions(&corpus, a.min_comments, &lexicon)?;
    write_corpus(&kept, &a.out)?;
    Ok(format!(
        "filter: kept {} of {} sessions (min comments {}, lexicon {})",
        kept.len(),
        corpus.len(),
        a.min_comments,
        lexicon.name
    ))
}

fn labels(a: &LabelsArgs) -> Result<String> {
    require_file(&a.labels)?;
    ensure_parent(&a.out)?;
    let records = load_label_records(&a.labels)?;
    let (kept, report) = aggregate_with_report(&records, a.confidence, target(a.target))?;
    write_aggregated_labels(&kept, &a.out)?;
    let report_path = a.report.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".report.json");
        PathBuf::from(p)
    });
    ensure_parent(&report_path)?;
    write_atomic(&report_path, serde_json::to_string_pretty(&report)?.as_bytes())?;
    let kappa = |k: Option<f64>| k.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"));
    Ok(format!(
        "labels: {} sessions, kept {}, dropped {} at confidence {} ({}); kappa bullying {}, aggression {}",
        report.sessions,
        report.kept,
        report.dropped,
        report.threshold,
        report.target.as_str(),
        kappa(report.kappa_bullying),
        kappa(report.kappa_aggression)
    ))
}

fn analyze(a: &AnalyzeArgs) -> Result<String> {
    require_file(&a.corpus)?;
    let selected: Vec<&str> = if a.reports.is_empty() {
        REPORT_NAMES.to_vec()
    } else {
        for r in &a.reports {
            if !REPORT_NAMES.contains(&r.as_str()) {
                return Err(usage(format!("unknown report {r:?}; choose from {}", REPORT_NAMES.join(", "))));
            }
        }
        REPORT_NAMES.iter().copied().filter(|n| a.reports.iter().any(|r| r == n)).collect()
    };
    let labels = load_labels(&a.labels)?;
    let lexicon = profanity(&a.profanity)?;
    let cats = match &a.categories {
        Some(p) => load_category_lexicon(p)?,
        None => CategoryLexicon::bundled_demo(),
    };
    let thresholds = if a.thresholds.is_empty() {
        DEFAULT_TEMPORAL_THRESHOLDS.to_vec()
    } else {
        a.thresholds.clone()
    };
    ensure_dir(&a.out_dir)?;
    let corpus = load_corpus(&a.corpus)?;
    let mut written = Vec::new();
    for name in selected {
        let mut report: Report = match name {
            "vote_distribution" => analysis::vote_distribution(&labels),
            "vote_heatmap" => analysis::vote_heatmap(&labels),
            "negativity_bins" => analysis::negativity_bins_report(&corpus, &labels, &lexicon),
            "temporal_correlation" => analysis::temporal_correlation_report(&corpus, &labels, &thresholds)?,
            "graph_properties" => analysis::graph_property_table(&corpus, &labels),
            "liwc_ratios" => analysis::liwc_ratio_report(&corpus, &labels, &cats, target(a.target)),
            "image_categories" => {
                let images = image_labels(&a.image_labels, &corpus)?;
                analysis::image_category_report(&corpus, &labels, &images)
            }
            _ => unreachable!("validated above"),
        };
        report.notes.push(format!(
            "config: profanity={} categories={} thresholds={thresholds:?} target={}",
            lexicon.name,
            cats.names().collect::<Vec<_>>().join("|"),
            target(a.target).as_str()
        ));
        report.write(&a.out_dir, a.plot_data)?;
        written.push(name);
    }
    Ok(format!(
        "analyze: wrote {} reports ({}) to {}",
        written.len(),
        written.join(", "),
        a.out_dir.display()
    ))
}

fn eval_detect(a: &DetectArgs, g: &Global) -> Result<String> {
    let c = &a.common;
    require_file(&c.corpus)?;
    let text = text_config(&c.text, a.caption.on())?;
    let config = DetectionConfig {
        features: FeatureConfig {
            text: Some(text),
            ..FeatureConfig::detection_default()
        },
        classifier: classifier(c.model.classifier),
        train: train_config(&c.model, g.seed),
        target: target(c.model.target),
        folds: c.folds,
        seed: g.seed,
        oversample: c.oversample.on(),
        shuffle_labels: a.shuffle_labels,
        stopwords: stopwords(&c.text.stopword_list)?,
        jobs: g.jobs,
    };
    let labels = load_labels(&c.labels)?;
    ensure_dir(&c.out_dir)?;
    let corpus = load_corpus(&c.corpus)?;
    let report = run_detection_experiment(&corpus, &labels, &config)?;
    report.write(&c.out_dir, "detection")?;
    let m = report.rows[0].mean;
    Ok(format!(
        "eval detect: {} folds, mean precision {:.4} recall {:.4} f1 {:.4}",
        config.folds, m.precision, m.recall, m.f1
    ))
}

fn eval_predict(a: &PredictEvalArgs, g: &Global) -> Result<String> {
    let c = &a.common;
    require_file(&c.corpus)?;
    let config = PredictionConfig {
        level: level(a.level),
        k_comments: a.k_comments,
        text: text_config(&c.text, true)?,
        classifier: classifier(c.model.classifier),
        train: train_config(&c.model, g.seed),
        target: target(c.model.target),
        folds: c.folds,
        seed: g.seed,
        oversample: c.oversample.on(),
        stopwords: stopwords(&c.text.stopword_list)?,
        jobs: g.jobs,
    };
    let labels = load_labels(&c.labels)?;
    ensure_dir(&c.out_dir)?;
    let corpus = load_corpus(&c.corpus)?;
    let images = image_labels(&a.image_labels, &corpus)?;
    let report = run_prediction_experiment(&corpus, &labels, &images, &config)?;
    report.write(&c.out_dir, "prediction")?;
    let rungs: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("{} {:.4}", r.label, r.mean.f1))
        .collect();
    Ok(format!("eval predict: mean f1 by rung: {}", rungs.join(", ")))
}

fn train_cmd(a: &TrainArgs, g: &Global) -> Result<String> {
    require_file(&a.corpus)?;
    let text = text_config(&a.text, false)?;
    let features = match a.level {
        Some(l) => prediction_config(level(l), a.k_comments, &TextConfig { include_caption: true, ..text }),
        None => FeatureConfig {
            text: Some(text),
            ..FeatureConfig::detection_default()
        },
    };
    let stop = stopwords(&a.text.stopword_list)?;
    let tcfg = train_config(&a.model, g.seed);
    let labels = load_labels(&a.labels)?;
    ensure_dir(&a.out_dir)?;
    let corpus = load_corpus(&a.corpus)?;
    let images = if features.image {
        Some(image_labels(&a.image_labels, &corpus)?)
    } else {
        None
    };
    let t = target(a.model.target);
    let sessions: Vec<_> = corpus
        .sessions
        .iter()
        .filter(|s| labels.contains_key(&s.session_id))
        .collect();
    if sessions.is_empty() {
        return Err(Error::Data("no corpus session has a label".into()).into());
    }
    let y: Vec<bool> = sessions.iter().map(|s| labels[&s.session_id].is_positive(t)).collect();
    let pipeline = FittedPipeline::fit(&features, &sessions, &stop, g.seed)?;
    let x = sessions
        .iter()
        .map(|s| {
            let img = images.as_ref().and_then(|m| m.get(&s.session_id));
            pipeline.transform(s, img).map(|v| v.values)
        })
        .collect::<bullyscope_core::Result<Vec<_>>>()?;
    let order: Vec<usize> = (0..x.len()).collect();
    let order = if a.oversample.on() {
        oversample_minority(&order, &y, g.seed)?
    } else {
        order
    };
    let xs: Vec<Vec<f64>> = order.iter().map(|&i| x[i].clone()).collect();
    let ys: Vec<usize> = order.iter().map(|&i| usize::from(y[i])).collect();
    let data = Dataset::new(&xs, &ys, pipeline.schema())?;
    let model = train(classifier(a.model.classifier), &data, &tcfg)?;
    write_atomic(&a.out_dir.join("pipeline.json"), pipeline.to_json().as_bytes())?;
    model.save(a.out_dir.join("model.json"))?;
    Ok(format!(
        "train: {} model on {} sessions ({} rows after oversampling), {} features, schema {}",
        model.kind,
        sessions.len(),
        xs.len(),
        pipeline.schema().len(),
        pipeline.schema().fingerprint
    ))
}

#[derive(Serialize)]
struct PredictionLine<'a> {
    session_id: &'a str,
    class: usize,
    score: f64,
}

fn predict_cmd(a: &PredictArgs) -> Result<String> {
    let pipeline_path = a.model_dir.join("pipeline.json");
    let model_path = a.model_dir.join("model.json");
    require_file(&pipeline_path)?;
    require_file(&model_path)?;
    require_file(&a.corpus)?;
    ensure_parent(&a.out)?;
    let text = fs::read_to_string(&pipeline_path).with_context(|| format!("reading {}", pipeline_path.display()))?;
    let pipeline = FittedPipeline::from_json(&text)?;
    let model = LinearModel::load(&model_path)?;
    pipeline.schema().check(&model.schema_fingerprint)?;
    let corpus = load_corpus(&a.corpus)?;
    let images = if pipeline.config().image {
        Some(image_labels(&a.image_labels, &corpus)?)
    } else {
        None
    };
    let mut out = String::new();
    let mut positives = 0;
    for s in &corpus.sessions {
        let img = images.as_ref().and_then(|m| m.get(&s.session_id));
        let v = pipeline.transform(s, img)?;
        let p = predict(&model, &v)?;
        positives += usize::from(p.class == 1);
        out.push_str(&serde_json::to_string(&PredictionLine {
            session_id: &s.session_id,
            class: p.class,
            score: p.score,
        })?);
        out.push('\n');
    }
    write_atomic(&a.out, out.as_bytes())?;
    Ok(format!(
        "predict: scored {} sessions, {positives} predicted positive",
        corpus.len()
    ))
}

fn synth(a: &SynthArgs, g: &Global) -> Result<String> {
    let spec = SyntheticSpec {
        sessions: a.sessions,
        positive_fraction: a.positive_fraction,
        bully_token_rate: a.bully_token_rate,
        raters: a.raters,
        flip_rate: a.flip_rate,
        image_signal: match a.image_signal {
            ImageSignalArg::None => ImageSignal::None,
            ImageSignalArg::Perfect => ImageSignal::Perfect,
        },
        ..SyntheticSpec::default()
    };
    ensure_dir(&a.out_dir)?;
    let syn = generate_synthetic_corpus(&spec, g.seed)?;
    write_corpus(&syn.corpus, a.out_dir.join("corpus.jsonl"))?;
    write_label_records(&syn.labels, a.out_dir.join("labels.jsonl"))?;
    write_image_label_records(&syn.image_labels, a.out_dir.join("image_labels.jsonl"))?;
    write_atomic(
        &a.out_dir.join("synth_config.json"),
        serde_json::to_string_pretty(&spec)?.as_bytes(),
    )?;
    let positives = syn.truth.iter().filter(|&&t| t).count();
    Ok(format!(
        "synth: {} sessions ({positives} bullying) with {} vote records in {}",
        syn.corpus.len(),
        syn.labels.len(),
        a.out_dir.display()
    ))
}
