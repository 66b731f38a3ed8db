//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the output reads as a checklist.
//! Exits non-zero if any criterion fails.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use bullyscope_core::analysis::{
    image_category_report, liwc_ratio_report, negativity_bins_report, vote_distribution, vote_heatmap, Report,
};
use bullyscope_core::corpus::{generate_synthetic_corpus, Comment, Corpus, ImageSignal, MediaSession, OwnerStats, SyntheticSpec};
use bullyscope_core::eval::{
    run_detection_experiment, run_detection_folds, run_prediction_experiment, DetectionConfig, PredictionConfig,
};
use bullyscope_core::features::{segment_terms, text_segments, ComponentKind, TermOptions};
use bullyscope_core::labels::{
    aggregate_all, aggregate_votes, filter_by_confidence, fleiss_kappa, label_set, resolve_image_labels, ImageCategory,
    ImageLabel, LabelRecord, LabelSet, Target,
};
use bullyscope_core::lexicon::{CategoryLexicon, Lexicon};
use bullyscope_core::models::{dense_schema, logistic_objective, maxent_objective, train_svm, Dataset, TrainConfig};
use bullyscope_core::numerics::{pearson, seeded_rng, truncated_svd, truncated_svd_with, welch_t, Matrix, SvdOptions};
use nalgebra::DMatrix;
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(a: f64, b: f64, tol: f64, what: &str) -> Result<(), String> {
    ensure((a - b).abs() <= tol, || format!("{what}: got {a}, expected {b} (tol {tol})"))
}

// ---------------------------------------------------------------- 1

fn fleiss() -> Outcome {
    // Items [5,0,3] of 5 raters: per-item agreement 1, 1, (9+4-5)/20.
    let p_bar = (1.0 + 1.0 + 8.0 / 20.0) / 3.0;
    let p_yes = 8.0 / 15.0;
    let p_e = p_yes * p_yes + (1.0 - p_yes) * (1.0 - p_yes);
    let oracle = (p_bar - p_e) / (1.0 - p_e);
    close(oracle, 67.0 / 112.0, 1e-12, "hand oracle")?;
    let k = fleiss_kappa(&[5, 0, 3], 5).map_err(|e| e.to_string())?;
    close(k, oracle, 1e-4, "kappa")?;
    close(k, 0.5982, 1e-4, "kappa vs 0.5982")?;
    let perfect = fleiss_kappa(&[5, 0, 0, 5], 5).map_err(|e| e.to_string())?;
    ensure(perfect == 1.0, || format!("perfect agreement gave {perfect}"))?;
    Ok(format!("kappa={k:.5}, perfect={perfect}"))
}

// ---------------------------------------------------------------- 2

fn aggregation_exhaustive() -> Outcome {
    for pattern in 0u32..32 {
        let records: Vec<LabelRecord> = (0..5)
            .map(|r| LabelRecord {
                session_id: "s".into(),
                rater_id: format!("r{r}"),
                trust: 1.0,
                bullying_vote: pattern >> r & 1 == 1,
                aggression_vote: pattern >> r & 1 == 0,
            })
            .collect();
        let l = aggregate_votes(&records).map_err(|e| e.to_string())?;
        // brute-force enumeration of the weighted majority
        let yes = records.iter().filter(|r| r.bullying_vote).count();
        let no = 5 - yes;
        let want_conf = yes.max(no) as f64 / 5.0;
        ensure(l.bullying_votes == yes && l.aggression_votes == no, || format!("pattern {pattern:05b}: vote counts"))?;
        ensure(l.is_bullying == (yes > no), || format!("pattern {pattern:05b}: bullying label"))?;
        ensure(l.is_aggression == (no > yes), || format!("pattern {pattern:05b}: aggression label"))?;
        ensure(l.bullying_confidence == want_conf, || {
            format!("pattern {pattern:05b}: confidence {} != {want_conf}", l.bullying_confidence)
        })?;
        ensure(l.aggression_confidence == want_conf, || format!("pattern {pattern:05b}: aggression confidence"))?;
    }
    Ok("32/32 patterns".into())
}

// ---------------------------------------------------------------- 3

fn svd() -> Outcome {
    let mut rng = seeded_rng(11, "acceptance/svd");
    let b: Vec<f64> = (0..50 * 10).map(|_| rng.random_range(-1.0..1.0)).collect();
    let c: Vec<f64> = (0..10 * 40).map(|_| rng.random_range(-1.0..1.0)).collect();
    let b = Matrix::from_row_major(50, 10, b).map_err(|e| e.to_string())?;
    let c = Matrix::from_row_major(10, 40, c).map_err(|e| e.to_string())?;
    let m = b.matmul(&c);

    let oracle = DMatrix::from_row_slice(50, 40, m.values()).svd(false, false);
    let mut want: Vec<f64> = oracle.singular_values.iter().copied().collect();
    want.sort_by(|x, y| y.total_cmp(x));

    let mut worst = 0.0f64;
    let randomized = SvdOptions {
        exact_threshold: 0,
        ..SvdOptions::default()
    };
    let runs = [
        ("default", truncated_svd(&m, 10, 3, 2)),
        ("randomized", truncated_svd_with(&m, 10, 3, &randomized)),
    ];
    for (name, res) in runs {
        let res = res.map_err(|e| format!("{name}: {e}"))?;
        ensure(res.rank() == 10, || format!("{name}: rank {}", res.rank()))?;
        let mut diff = res.reconstruct();
        for i in 0..50 {
            for j in 0..40 {
                diff[(i, j)] -= m[(i, j)];
            }
        }
        let rel = diff.frobenius_norm() / m.frobenius_norm();
        worst = worst.max(rel);
        ensure(rel <= 1e-6, || format!("{name}: relative reconstruction error {rel:e}"))?;
        let s = &res.singular_values;
        ensure(s.windows(2).all(|w| w[0] >= w[1]), || format!("{name}: singular values not sorted"))?;
        for (got, want) in s.iter().zip(&want) {
            close(*got, *want, 1e-8 * want.max(1.0), &format!("{name}: singular value"))?;
        }
        for (i, vi) in res.right_vectors.iter().enumerate() {
            for (j, vj) in res.right_vectors.iter().enumerate() {
                let d: f64 = vi.iter().zip(vj).map(|(a, b)| a * b).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                close(d, expect, 1e-8, &format!("{name}: v{i}.v{j}"))?;
            }
        }
    }
    Ok(format!("worst relative error {worst:.2e}"))
}

// ---------------------------------------------------------------- 4

fn random_problem(seed: u64, classes: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = seeded_rng(seed, "acceptance/gradient");
    let x: Vec<Vec<f64>> = (0..10)
        .map(|_| (0..8).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let mut y: Vec<usize> = (0..10).map(|i| i % classes).collect();
    y.rotate_left(rng.random_range(0..10));
    (x, y)
}

fn relative_gap(analytic: &[f64], f: impl Fn(&[f64]) -> f64, at: &[f64]) -> f64 {
    let h = 1e-5;
    let numeric: Vec<f64> = (0..at.len())
        .map(|i| {
            let mut p = at.to_vec();
            p[i] += h;
            let up = f(&p);
            p[i] -= 2.0 * h;
            (up - f(&p)) / (2.0 * h)
        })
        .collect();
    let diff: f64 = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let scale = analytic.iter().map(|a| a * a).sum::<f64>().sqrt().max(numeric.iter().map(|n| n * n).sum::<f64>().sqrt());
    diff / scale.max(1e-12)
}

fn gradients() -> Outcome {
    let lambda = 0.01;
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let (x, y) = random_problem(seed, 2);
        let mut rng = seeded_rng(seed, "acceptance/gradient/params");
        let p: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (_, g) = logistic_objective(&p, &x, &y, lambda);
        let gap = relative_gap(&g, |q| logistic_objective(q, &x, &y, lambda).0, &p);
        worst = worst.max(gap);
        ensure(gap <= 1e-5, || format!("logistic problem {seed}: relative gap {gap:e}"))?;

        let (x, y) = random_problem(seed + 100, 3);
        let p: Vec<f64> = (0..27).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (_, g) = maxent_objective(&p, 3, &x, &y, lambda);
        let gap = relative_gap(&g, |q| maxent_objective(q, 3, &x, &y, lambda).0, &p);
        worst = worst.max(gap);
        ensure(gap <= 1e-5, || format!("maxent problem {seed}: relative gap {gap:e}"))?;
    }
    Ok(format!("40 problems, worst relative gap {worst:.2e}"))
}

// ---------------------------------------------------------------- 5

fn svm_sanity() -> Outcome {
    // Points at distance >= 0.5 from the line x0 + x1 = 0.4.
    let mut rng = seeded_rng(5, "acceptance/svm");
    let (mut x, mut y) = (Vec::new(), Vec::new());
    while x.len() < 200 {
        let p = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let dist = (p[0] + p[1] - 0.4) / 2f64.sqrt();
        if dist.abs() >= 0.5 {
            x.push(p.to_vec());
            y.push(usize::from(dist > 0.0));
        }
    }
    let schema = dense_schema(2, ComponentKind::Continuous);
    let data = Dataset::new(&x, &y, &schema).map_err(|e| e.to_string())?;
    let config = TrainConfig {
        lambda: 1e-4,
        epochs: 50,
        seed: 9,
        ..TrainConfig::default()
    };
    let model = train_svm(&data, &config).map_err(|e| e.to_string())?;
    let correct = x
        .iter()
        .zip(&y)
        .filter(|(xi, &yi)| model.predict_values(xi).map(|p| p.class == yi).unwrap_or(false))
        .count();
    ensure(correct == 200, || format!("training accuracy {correct}/200"))?;
    let again = train_svm(&data, &config).map_err(|e| e.to_string())?;
    ensure(model.to_json() == again.to_json(), || "retraining with the same seed changed the model".into())?;
    Ok("accuracy 200/200, deterministic".into())
}

// ---------------------------------------------------------------- 6

fn synthetic(spec: &SyntheticSpec, seed: u64) -> (Corpus, LabelSet, BTreeMap<String, ImageLabel>) {
    let syn = generate_synthetic_corpus(spec, seed).expect("synthetic corpus");
    let all = aggregate_all(&syn.labels).expect("aggregation");
    let kept = filter_by_confidence(&all, 0.6, Target::Bullying).expect("confidence filter");
    let images = resolve_image_labels(&syn.image_labels).expect("image labels");
    (syn.corpus, label_set(kept), images)
}

fn detection() -> Outcome {
    let (corpus, labels, _) = synthetic(&SyntheticSpec::default(), 0);
    let mut config = DetectionConfig::default();
    if let Some(text) = config.features.text.as_mut() {
        text.use_bigrams = false;
    }
    let start = Instant::now();
    let report = run_detection_experiment(&corpus, &labels, &config).map_err(|e| e.to_string())?;
    let f1 = report.rows[0].mean.f1;
    ensure(f1 >= 0.9, || format!("detection F1 {f1:.4} < 0.9"))?;
    let detect_time = start.elapsed();
    ensure(detect_time < Duration::from_secs(60), || format!("detection took {detect_time:?}"))?;

    // A guesser that says "positive" at the class rate scores F1 = pi.
    let pi = labels.values().filter(|l| l.is_bullying).count() as f64 / labels.len() as f64;
    config.shuffle_labels = true;
    let shuffled = run_detection_experiment(&corpus, &labels, &config).map_err(|e| e.to_string())?;
    let f1_null = shuffled.rows[0].mean.f1;
    ensure((f1_null - pi).abs() <= 0.1, || format!("shuffled F1 {f1_null:.4} vs baseline {pi:.4}"))?;
    Ok(format!(
        "F1={f1:.4} in {:.1}s; shuffled F1={f1_null:.4}, baseline={pi:.4}",
        detect_time.as_secs_f64()
    ))
}

// ---------------------------------------------------------------- 7

fn prediction_ladder() -> Outcome {
    let (corpus, labels, images) = synthetic(&SyntheticSpec::default(), 1);
    let f1_at = |k: usize, corpus: &Corpus, labels: &LabelSet, images: &BTreeMap<String, ImageLabel>| {
        let config = PredictionConfig {
            k_comments: k,
            ..PredictionConfig::default()
        };
        run_prediction_experiment(corpus, labels, images, &config)
            .map_err(|e| e.to_string())
            .and_then(|r| r.row("comments").map(|row| row.mean.f1).ok_or_else(|| "no comments row".to_string()))
    };
    let f1_15 = f1_at(15, &corpus, &labels, &images)?;
    let f1_0 = f1_at(0, &corpus, &labels, &images)?;
    ensure(f1_15 - f1_0 >= 0.1, || format!("comment-only: F1(15)={f1_15:.4}, F1(0)={f1_0:.4}"))?;

    let spec = SyntheticSpec {
        image_signal: ImageSignal::Perfect,
        bully_token_rate: 0.0,
        ..SyntheticSpec::default()
    };
    let (corpus, labels, images) = synthetic(&spec, 2);
    let f1_img = f1_at(0, &corpus, &labels, &images)?;
    ensure(f1_img >= 0.9, || format!("image-only: F1(0)={f1_img:.4}"))?;
    Ok(format!("comment-only F1(15)={f1_15:.4} F1(0)={f1_0:.4}; image-only F1(0)={f1_img:.4}"))
}

// ---------------------------------------------------------------- 8

fn leakage() -> Outcome {
    let spec = SyntheticSpec {
        sessions: 200,
        ..SyntheticSpec::default()
    };
    let (mut corpus, labels, _) = synthetic(&spec, 3);
    for (i, s) in corpus.sessions.iter_mut().enumerate() {
        if let Some(c) = s.comments.iter_mut().find(|c| !c.is_owner) {
            c.text.push_str(&format!(" uniquemarker{i}"));
        }
    }
    let mut config = DetectionConfig::default();
    let text = config.features.text.as_mut().expect("text features");
    text.min_df = 1;
    text.lsa_rank = None;
    let text = text.clone();
    let (folds, _) = run_detection_folds(&corpus, &labels, &config).map_err(|e| e.to_string())?;

    let stopwords = text.remove_stopwords.then_some(&config.stopwords);
    let options = TermOptions {
        use_bigrams: text.use_bigrams,
    };
    let terms_of = |ids: &[String]| -> BTreeSet<String> {
        ids.iter()
            .flat_map(|id| {
                let s = corpus.get(id).expect("fold id in corpus");
                text_segments(&text, s)
                    .into_iter()
                    .flat_map(|seg| segment_terms(seg, options, stopwords))
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    let mut checked = 0;
    for f in &folds {
        let vocab: BTreeSet<String> = f.vocabulary.clone().ok_or("fold has no vocabulary")?.into_iter().collect();
        let train_terms = terms_of(&f.train_ids);
        let test_only: BTreeSet<String> = terms_of(&f.test_ids).difference(&train_terms).cloned().collect();
        ensure(!test_only.is_empty(), || format!("fold {}: no test-only terms to audit", f.fold))?;
        let leaked: Vec<&String> = vocab.intersection(&test_only).collect();
        ensure(leaked.is_empty(), || format!("fold {}: leaked terms {:?}", f.fold, &leaked[..leaked.len().min(5)]))?;
        // with min_df 1 every training term is kept, so the audit has teeth
        ensure(vocab == train_terms, || format!("fold {}: vocabulary differs from training terms", f.fold))?;
        checked += test_only.len();
    }
    Ok(format!("{} folds, {checked} test-only terms excluded", folds.len()))
}

// ---------------------------------------------------------------- 9

/// Student t CDF for four degrees of freedom, in closed form.
fn t4_cdf(t: f64) -> f64 {
    let u = t * t / (4.0 + t * t);
    0.5 + 0.5 * t.signum() * u.sqrt() * (1.5 - 0.5 * u)
}

fn statistics() -> Outcome {
    let err = |e: bullyscope_core::Error| e.to_string();
    let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).map_err(err)?;
    ensure(r == 1.0, || format!("r = {r}, expected exactly 1"))?;
    let r = pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).map_err(err)?;
    ensure(r == -1.0, || format!("r = {r}, expected exactly -1"))?;
    // deviations (-1,0,1) and (-2/3,1/3,1/3): r = 1 / sqrt(2 * 2/3)
    let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0]).map_err(err)?;
    close(r, 3f64.sqrt() / 2.0, 1e-9, "r")?;
    close(r, 0.8660, 1e-4, "r vs 0.8660")?;

    // both variances 1, n = 3: t = -1 / sqrt(2/3), df = (2/3)^2 / (2 (1/3)^2 / 2)
    let w = welch_t(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).map_err(err)?;
    close(w.t, -(1.5f64.sqrt()), 1e-9, "t")?;
    close(w.t, -1.2247, 1e-4, "t vs -1.2247")?;
    close(w.df, 4.0, 1e-9, "df")?;
    let p = 2.0 * (1.0 - t4_cdf(w.t.abs()));
    close(w.p_two_sided, p, 1e-9, "p")?;
    Ok(format!("r={r:.6}, t={:.6}, df={}, p={:.6}", w.t, w.df, w.p_two_sided))
}

// ---------------------------------------------------------------- 10

fn bullyscope(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_bullyscope"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("bullyscope {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim())
    })
}

fn files_under(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).expect("read dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).expect("under dir").to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).expect("read file"));
            }
        }
    }
    out
}

fn run_experiments(data: &Path, out: &Path, jobs: &str) -> Result<(), String> {
    let s = |p: &Path| p.to_string_lossy().into_owned();
    let corpus = s(&data.join("corpus.jsonl"));
    let labels = s(&data.join("agg.jsonl"));
    let images = s(&data.join("image_labels.jsonl"));
    let common = ["--seed", "7", "--jobs", jobs];
    let detect = s(&out.join("detect"));
    let shuffled = s(&out.join("shuffled"));
    let predict = s(&out.join("predict"));
    let analysis = s(&out.join("analysis"));
    let model = s(&out.join("model"));
    let preds = s(&out.join("predictions.jsonl"));
    let eval = |extra: &[&str]| {
        let mut args = vec!["eval"];
        args.extend_from_slice(extra);
        args.extend_from_slice(&["--corpus", &corpus, "--labels", &labels, "--epochs", "20"]);
        args.extend_from_slice(&common);
        bullyscope(&args)
    };
    eval(&["detect", "--out-dir", &detect])?;
    eval(&["detect", "--shuffle-labels", "--out-dir", &shuffled])?;
    eval(&["predict", "--image-labels", &images, "--out-dir", &predict])?;
    let mut args = vec!["analyze", "--corpus", &corpus, "--labels", &labels, "--image-labels", &images];
    args.extend_from_slice(&["--out-dir", &analysis, "--plot-data"]);
    args.extend_from_slice(&common);
    bullyscope(&args)?;
    let mut args = vec!["train", "--corpus", &corpus, "--labels", &labels, "--out-dir", &model, "--epochs", "20"];
    args.extend_from_slice(&common);
    bullyscope(&args)?;
    let mut args = vec!["predict", "--model-dir", &model, "--corpus", &corpus, "--out", &preds];
    args.extend_from_slice(&common);
    bullyscope(&args)
}

fn cli_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = tmp.path().join("data");
    let d = data.to_string_lossy().into_owned();
    bullyscope(&["synth", "--out-dir", &d, "--sessions", "200", "--seed", "7"])?;
    let raw = data.join("labels.jsonl").to_string_lossy().into_owned();
    let agg = data.join("agg.jsonl").to_string_lossy().into_owned();
    bullyscope(&["labels", "--labels", &raw, "--out", &agg])?;

    let runs = [("jobs1", "1"), ("jobs4", "4"), ("jobs1-again", "1")];
    let mut outputs = Vec::new();
    for (name, jobs) in runs {
        let out = tmp.path().join(name);
        run_experiments(&data, &out, jobs)?;
        outputs.push((name, files_under(&out)));
    }
    let (base_name, base) = &outputs[0];
    ensure(base.len() >= 8, || format!("only {} output files", base.len()))?;
    for (name, files) in &outputs[1..] {
        ensure(files.keys().eq(base.keys()), || format!("{name} wrote a different file set than {base_name}"))?;
        for (path, bytes) in files {
            ensure(bytes == &base[path], || format!("{path} differs between {base_name} and {name}"))?;
        }
    }
    Ok(format!("{} files byte-identical across --jobs 1, 4, 1", base.len()))
}

// ---------------------------------------------------------------- 11

/// (bullying votes, aggression votes, comments, profane comments, image category)
const FIXTURE: [(usize, usize, usize, usize, ImageCategory); 20] = {
    use ImageCategory::{Drugs, Person, Text};
    [
        (0, 0, 10, 0, Drugs),
        (0, 0, 10, 1, Person),
        (0, 0, 5, 1, Person),
        (0, 0, 4, 1, Person),
        (0, 1, 10, 2, Person),
        (0, 1, 3, 1, Person),
        (1, 2, 5, 2, Person),
        (2, 3, 2, 1, Person),
        (2, 3, 10, 5, Person),
        (3, 4, 5, 3, Drugs),
        (3, 4, 10, 7, Drugs),
        (3, 4, 4, 3, Drugs),
        (4, 2, 5, 4, Text),
        (5, 5, 10, 9, Text),
        (5, 5, 1, 1, Text),
        (5, 5, 3, 2, Text),
        (4, 5, 5, 3, Text),
        (3, 3, 10, 3, Text),
        (2, 2, 10, 4, Text),
        (3, 1, 5, 1, Text),
    ]
};

fn fixture() -> (Corpus, LabelSet, BTreeMap<String, ImageLabel>) {
    let mut sessions = Vec::new();
    let mut records = Vec::new();
    let mut images = BTreeMap::new();
    for (i, &(b, a, n, m, cat)) in FIXTURE.iter().enumerate() {
        let id = format!("s{:02}", i + 1);
        let comments = (0..n)
            .map(|j| {
                let text = if j < m {
                    "damn that".to_string()
                } else if id == "s14" {
                    "rip nice photo".to_string()
                } else {
                    "nice photo".to_string()
                };
                Comment {
                    author_id: format!("u{j}"),
                    posted_at: 1000 + 60 * j as i64,
                    text,
                    is_owner: false,
                }
            })
            .collect();
        sessions.push(MediaSession {
            session_id: id.clone(),
            owner_id: "owner".into(),
            caption: String::new(),
            post_time: 0,
            image_category_votes: vec![],
            owner_stats: OwnerStats::default(),
            comments,
        });
        for r in 0..5 {
            records.push(LabelRecord {
                session_id: id.clone(),
                rater_id: format!("r{r}"),
                trust: 1.0,
                bullying_vote: r < b,
                aggression_vote: r < a,
            });
        }
        images.insert(
            id.clone(),
            ImageLabel {
                session_id: id,
                category: cat,
                vote_counts: [(cat, 3)].into_iter().collect(),
            },
        );
    }
    let corpus = Corpus::new(sessions, "fixture").expect("fixture corpus");
    let labels = label_set(aggregate_all(&records).expect("fixture labels"));
    (corpus, labels, images)
}

fn expect_table(report: &Report, expected: &[(&str, Vec<Option<f64>>)]) -> Result<(), String> {
    ensure(report.rows.len() == expected.len(), || {
        format!("{}: {} rows, expected {}", report.name, report.rows.len(), expected.len())
    })?;
    for (row, (label, cells)) in report.rows.iter().zip(expected) {
        ensure(row.label == *label, || format!("{}: row {:?}, expected {label:?}", report.name, row.label))?;
        ensure(row.cells == *cells, || format!("{} row {label}: {:?} != {:?}", report.name, row.cells, cells))?;
    }
    Ok(())
}

fn analysis_reports() -> Outcome {
    let (corpus, labels, images) = fixture();
    let some = |v: &[f64]| v.iter().map(|&x| Some(x)).collect::<Vec<_>>();

    // columns: aggression, bullying
    let dist = vote_distribution(&labels);
    expect_table(
        &dist,
        &[
            ("0", some(&[0.2, 0.3])),
            ("1", some(&[0.15, 0.05])),
            ("2", some(&[0.15, 0.15])),
            ("3", some(&[0.15, 0.25])),
            ("4", some(&[0.15, 0.1])),
            ("5", some(&[0.2, 0.15])),
        ],
    )?;

    let heat = vote_heatmap(&labels);
    expect_table(
        &heat,
        &[
            ("bullying=0", some(&[4.0, 2.0, 0.0, 0.0, 0.0, 0.0])),
            ("bullying=1", some(&[0.0, 0.0, 1.0, 0.0, 0.0, 0.0])),
            ("bullying=2", some(&[0.0, 0.0, 1.0, 2.0, 0.0, 0.0])),
            ("bullying=3", some(&[0.0, 1.0, 0.0, 1.0, 3.0, 0.0])),
            ("bullying=4", some(&[0.0, 0.0, 1.0, 0.0, 0.0, 1.0])),
            ("bullying=5", some(&[0.0, 0.0, 0.0, 0.0, 0.0, 3.0])),
        ],
    )?;
    let flagged = vec![
        "below diagonal: bullying=3 aggression=1 (1 sessions)".to_string(),
        "below diagonal: bullying=4 aggression=2 (1 sessions)".to_string(),
    ];
    ensure(heat.notes == flagged, || format!("heatmap flags {:?}", heat.notes))?;

    // columns: sessions, aggression_pct, bullying_pct; s03 sits at exactly 20%
    let profanity = Lexicon::from_patterns("fixture", ["damn", "hell*"]).map_err(|e| e.to_string())?;
    let bins = negativity_bins_report(&corpus, &labels, &profanity);
    expect_table(
        &bins,
        &[
            ("[0-10]", some(&[2.0, 0.0, 0.0])),
            ("(10-20]", some(&[3.0, 0.0, 100.0 / 3.0])),
            ("(20-30]", some(&[2.0, 50.0, 50.0])),
            ("(30-40]", some(&[3.0, 0.0, 0.0])),
            ("(40-50]", some(&[2.0, 100.0, 0.0])),
            ("(50-60]", some(&[2.0, 100.0, 100.0])),
            ("(60-70]", some(&[2.0, 100.0, 100.0])),
            ("(70-80]", some(&[2.0, 50.0, 100.0])),
            ("(80-90]", some(&[1.0, 100.0, 100.0])),
            ("(90-100]", some(&[1.0, 100.0, 100.0])),
        ],
    )?;

    // swear hits: 36 over 10 bullying sessions, 18 over 10 others
    let cats = CategoryLexicon::parse("swear: damn hell*\nposemo: nice love\ndeath: rip").map_err(|e| e.to_string())?;
    let liwc = liwc_ratio_report(&corpus, &labels, &cats, Target::Bullying);
    let ratios: Vec<(String, Vec<Option<f64>>)> =
        liwc.rows.iter().map(|r| (r.label.clone(), r.cells[..3].to_vec())).collect();
    let want = vec![
        ("death".to_string(), vec![Some(0.1), Some(0.0), None]),
        ("posemo".to_string(), vec![Some(2.2), Some(5.1), Some(2.2 / 5.1)]),
        ("swear".to_string(), vec![Some(3.6), Some(1.8), Some(2.0)]),
    ];
    ensure(ratios == want, || format!("liwc ratios {ratios:?}"))?;
    ensure(liwc.notes.iter().any(|n| n.starts_with("death:")), || "missing undefined-ratio note".into())?;

    // columns: sessions, fraction_of_all, bullying_fraction, aggression_fraction
    let img = image_category_report(&corpus, &labels, &images);
    let expected: Vec<(&str, Vec<Option<f64>>)> = ImageCategory::ALL
        .iter()
        .map(|c| {
            let cells = match c {
                ImageCategory::Drugs => some(&[4.0, 0.2, 0.75, 0.75]),
                ImageCategory::Person => some(&[8.0, 0.4, 0.0, 0.25]),
                ImageCategory::Text => some(&[8.0, 0.4, 0.875, 0.625]),
                _ => vec![Some(0.0), None, None, None],
            };
            (c.as_str(), cells)
        })
        .collect();
    expect_table(&img, &expected)?;
    Ok("5 tables match".into())
}

// ----------------------------------------------------------------

fn main() {
    let criteria: [(&str, fn() -> Outcome, Option<Duration>); 11] = [
        ("1 fleiss kappa fixture", fleiss, Some(Duration::from_secs(1))),
        ("2 aggregation exhaustive oracle", aggregation_exhaustive, None),
        ("3 truncated svd", svd, Some(Duration::from_secs(5))),
        ("4 gradient checks", gradients, None),
        ("5 svm sanity", svm_sanity, None),
        ("6 end-to-end detection", detection, None),
        ("7 prediction ladder", prediction_ladder, None),
        ("8 leakage audit", leakage, None),
        ("9 statistics kernels", statistics, None),
        ("10 cli determinism", cli_determinism, None),
        ("11 analysis reports", analysis_reports, None),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check, budget) in criteria {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {elapsed:?}, budget {b:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS  {name:<34} {:>7.2}s  {detail}", elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<34} {:>7.2}s  {why}", elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
