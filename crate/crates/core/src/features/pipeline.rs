//! Feature configuration, schemas and the per-fold fitted pipeline.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::lsa::{fit_lsa, LsaModel};
use super::session::{
    image_features, post_time_features, social_features, temporal_features, POST_TIME_LEN,
};
use super::text::{build_vocabulary, vectorize_text, TermOptions, Vocabulary};
use crate::corpus::MediaSession;
use crate::error::{Error, Result};
use crate::labels::{ImageCategory, ImageLabel};
use crate::lexicon::Lexicon;
use crate::util::short_digest;

pub const DEFAULT_LSA_RANK: usize = 100;
pub const DEFAULT_MIN_DF: usize = 2;
const DOCUMENT_FORMAT: &str = "bullyscope-features";
const DOCUMENT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextConfig {
    pub use_bigrams: bool,
    pub remove_stopwords: bool,
    pub normalize: bool,
    pub min_df: usize,
    /// Project onto this many LSA components; `None` keeps raw term counts.
    pub lsa_rank: Option<usize>,
    pub include_caption: bool,
    pub include_comments: bool,
    /// Use only the first `n` comments.
    pub comment_limit: Option<usize>,
}

impl Default for TextConfig {
    fn default() -> Self {
        TextConfig {
            use_bigrams: true,
            remove_stopwords: true,
            normalize: true,
            min_df: DEFAULT_MIN_DF,
            lsa_rank: Some(DEFAULT_LSA_RANK),
            include_caption: false,
            include_comments: true,
            comment_limit: None,
        }
    }
}

impl TextConfig {
    fn term_options(&self) -> TermOptions {
        TermOptions {
            use_bigrams: self.use_bigrams,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub text: Option<TextConfig>,
    pub social: bool,
    /// Interarrival thresholds in seconds; `None` disables temporal features.
    pub temporal: Option<Vec<i64>>,
    pub image: bool,
    pub image_multi_hot: bool,
    pub post_time: bool,
}

impl FeatureConfig {
    /// Text-only detection features.
    pub fn detection_default() -> Self {
        FeatureConfig {
            text: Some(TextConfig::default()),
            social: false,
            temporal: None,
            image: false,
            image_multi_hot: false,
            post_time: false,
        }
    }
}

/// Nested feature sets for prediction at image post time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderLevel {
    Image,
    User,
    PostTime,
    Caption,
    Comments,
}

impl LadderLevel {
    pub const ALL: [LadderLevel; 5] = [
        LadderLevel::Image,
        LadderLevel::User,
        LadderLevel::PostTime,
        LadderLevel::Caption,
        LadderLevel::Comments,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LadderLevel::Image => "image",
            LadderLevel::User => "user",
            LadderLevel::PostTime => "post_time",
            LadderLevel::Caption => "caption",
            LadderLevel::Comments => "comments",
        }
    }

    /// This level and every level below it.
    pub fn up_to(self) -> Vec<LadderLevel> {
        LadderLevel::ALL.iter().copied().filter(|l| *l <= self).collect()
    }
}

impl std::fmt::Display for LadderLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LadderLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('+').to_ascii_lowercase();
        LadderLevel::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s || (s == "posttime" && *l == LadderLevel::PostTime))
            .ok_or_else(|| Error::invalid(format!("unknown ladder level {s:?}")))
    }
}

/// Feature configuration for one rung of the prediction ladder. `text`
/// supplies the n-gram settings used once caption or comment text enters.
pub fn prediction_config(level: LadderLevel, k_comments: usize, text: &TextConfig) -> FeatureConfig {
    let text = match level {
        LadderLevel::Caption => Some(TextConfig {
            include_caption: true,
            include_comments: false,
            comment_limit: Some(0),
            ..text.clone()
        }),
        LadderLevel::Comments => Some(TextConfig {
            include_caption: true,
            include_comments: k_comments > 0,
            comment_limit: Some(k_comments),
            ..text.clone()
        }),
        _ => None,
    };
    FeatureConfig {
        text,
        social: level >= LadderLevel::User,
        temporal: None,
        image: true,
        image_multi_hot: false,
        post_time: level >= LadderLevel::PostTime,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureGroup {
    pub name: String,
    pub len: usize,
    pub kind: ComponentKind,
    /// Digest of whatever fitted content defines the group (terms,
    /// projection), empty for fixed groups.
    pub digest: String,
}

impl FeatureGroup {
    /// Term counts or their LSA projection.
    pub fn is_text(&self) -> bool {
        self.name == "terms" || self.name == "lsa"
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub groups: Vec<FeatureGroup>,
    pub fingerprint: String,
}

impl FeatureSchema {
    pub fn new(groups: Vec<FeatureGroup>) -> Self {
        let fingerprint = schema_fingerprint(&groups);
        FeatureSchema { groups, fingerprint }
    }

    pub fn len(&self) -> usize {
        self.groups.iter().map(|g| g.len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn component_kinds(&self) -> Vec<ComponentKind> {
        self.groups
            .iter()
            .flat_map(|g| std::iter::repeat_n(g.kind, g.len))
            .collect()
    }

    pub fn check(&self, fingerprint: &str) -> Result<()> {
        if self.fingerprint != fingerprint {
            return Err(Error::Schema {
                expected: self.fingerprint.clone(),
                found: fingerprint.to_string(),
            });
        }
        Ok(())
    }
}

fn schema_fingerprint(groups: &[FeatureGroup]) -> String {
    short_digest(serde_json::to_string(groups).expect("groups serialize").as_bytes())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub schema_fingerprint: String,
}

/// Feature extractor fit on one training fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    config: FeatureConfig,
    stopwords: Option<Lexicon>,
    vocabulary: Option<Vocabulary>,
    lsa: Option<LsaModel>,
    schema: FeatureSchema,
    notes: Vec<String>,
}

/// Text segments a configuration reads from a session.
pub fn text_segments<'a>(text: &TextConfig, session: &'a MediaSession) -> Vec<&'a str> {
    let mut segments = Vec::new();
    if text.include_caption {
        segments.push(session.caption.as_str());
    }
    if text.include_comments {
        let limit = text.comment_limit.unwrap_or(usize::MAX);
        segments.extend(session.comments.iter().take(limit).map(|c| c.text.as_str()));
    }
    segments
}

impl FittedPipeline {
    /// Fits vocabulary and LSA (when configured) on `train` only.
    pub fn fit(
        config: &FeatureConfig,
        train: &[&MediaSession],
        stopwords: &Lexicon,
        seed: u64,
    ) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::invalid("cannot fit features on zero sessions"));
        }
        let mut groups = Vec::new();
        let mut notes = Vec::new();
        let mut vocabulary = None;
        let mut lsa = None;
        let stop = config
            .text
            .as_ref()
            .filter(|t| t.remove_stopwords)
            .map(|_| stopwords.clone());

        if let Some(text) = &config.text {
            let docs: Vec<Vec<&str>> = train.iter().map(|s| text_segments(text, s)).collect();
            let vocab = build_vocabulary(&docs, text.term_options(), stop.as_ref(), text.min_df)?;
            let terms_digest = short_digest(vocab.terms().join("\n").as_bytes());
            match text.lsa_rank {
                None => groups.push(FeatureGroup {
                    name: "terms".into(),
                    len: vocab.len(),
                    kind: ComponentKind::Continuous,
                    digest: terms_digest,
                }),
                Some(rank) => {
                    let max_rank = train.len().min(vocab.len());
                    let k = rank.min(max_rank);
                    if k < rank {
                        notes.push(format!(
                            "lsa rank reduced from {rank} to {k} ({} documents, {} terms)",
                            train.len(),
                            vocab.len()
                        ));
                    }
                    let vectors: Vec<Vec<f64>> = docs
                        .iter()
                        .map(|d| vectorize_text(d, &vocab, text.term_options(), stop.as_ref(), text.normalize))
                        .collect();
                    let model = fit_lsa(&vectors, k, seed)?;
                    let mut bytes = terms_digest.into_bytes();
                    for v in &model.right_vectors {
                        for x in v {
                            bytes.extend_from_slice(&x.to_le_bytes());
                        }
                    }
                    groups.push(FeatureGroup {
                        name: "lsa".into(),
                        len: k,
                        kind: ComponentKind::Continuous,
                        digest: short_digest(&bytes),
                    });
                    lsa = Some(model);
                }
            }
            vocabulary = Some(vocab);
        }
        if config.social {
            groups.push(FeatureGroup {
                name: "social".into(),
                len: 4,
                kind: ComponentKind::Continuous,
                digest: String::new(),
            });
        }
        if let Some(thresholds) = &config.temporal {
            groups.push(FeatureGroup {
                name: "temporal".into(),
                len: thresholds.len() + 1,
                kind: ComponentKind::Continuous,
                digest: short_digest(format!("{thresholds:?}").as_bytes()),
            });
        }
        if config.image {
            groups.push(FeatureGroup {
                name: "image".into(),
                len: ImageCategory::ALL.len(),
                kind: ComponentKind::Binary,
                digest: if config.image_multi_hot { "multi".into() } else { String::new() },
            });
        }
        if config.post_time {
            groups.push(FeatureGroup {
                name: "post_time".into(),
                len: POST_TIME_LEN,
                kind: ComponentKind::Binary,
                digest: String::new(),
            });
        }
        if groups.is_empty() {
            return Err(Error::invalid("feature configuration selects no features"));
        }
        Ok(FittedPipeline {
            config: config.clone(),
            stopwords: stop,
            vocabulary,
            lsa,
            schema: FeatureSchema::new(groups),
            notes,
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    pub fn vocabulary(&self) -> Option<&Vocabulary> {
        self.vocabulary.as_ref()
    }

    pub fn lsa(&self) -> Option<&LsaModel> {
        self.lsa.as_ref()
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    /// Assembles the feature vector of one session.
    pub fn transform(&self, session: &MediaSession, image: Option<&ImageLabel>) -> Result<FeatureVector> {
        let mut values = Vec::with_capacity(self.schema.len());
        if let (Some(text), Some(vocab)) = (&self.config.text, &self.vocabulary) {
            let segments = text_segments(text, session);
            let counts = vectorize_text(
                &segments,
                vocab,
                text.term_options(),
                self.stopwords.as_ref(),
                text.normalize,
            );
            match &self.lsa {
                Some(model) => values.extend(model.project(&counts)?),
                None => values.extend(counts),
            }
        }
        if self.config.social {
            values.extend(social_features(session));
        }
        if let Some(thresholds) = &self.config.temporal {
            values.extend(temporal_features(session, thresholds).to_vec());
        }
        if self.config.image {
            let label = image.ok_or_else(|| {
                Error::data(format!("missing image label for session {}", session.session_id))
            })?;
            values.extend(image_features(label, self.config.image_multi_hot));
        }
        if self.config.post_time {
            values.extend(post_time_features(session.post_time));
        }
        debug_assert_eq!(values.len(), self.schema.len());
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::numeric(format!(
                "non-finite feature in session {}",
                session.session_id
            )));
        }
        Ok(FeatureVector {
            values,
            schema_fingerprint: self.schema.fingerprint.clone(),
        })
    }

    pub fn to_json(&self) -> String {
        let doc = PipelineDocument {
            format: DOCUMENT_FORMAT.into(),
            version: DOCUMENT_VERSION,
            config: self.config.clone(),
            stopwords: self.stopwords.as_ref().map(|l| StopwordsDocument {
                name: l.name.clone(),
                entries: l.entries.iter().cloned().collect(),
            }),
            terms: self.vocabulary.clone(),
            lsa: self.lsa.clone(),
            schema: self.schema.clone(),
            notes: self.notes.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("pipeline serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PipelineDocument =
            serde_json::from_str(text).map_err(|e| Error::data(format!("feature document: {e}")))?;
        doc.into_pipeline()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct StopwordsDocument {
    name: String,
    entries: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct PipelineDocument {
    format: String,
    version: u32,
    config: FeatureConfig,
    stopwords: Option<StopwordsDocument>,
    terms: Option<Vocabulary>,
    lsa: Option<LsaModel>,
    schema: FeatureSchema,
    #[serde(default)]
    notes: Vec<String>,
}

impl PipelineDocument {
    fn into_pipeline(self) -> Result<FittedPipeline> {
        if self.format != DOCUMENT_FORMAT || self.version != DOCUMENT_VERSION {
            return Err(Error::data(format!(
                "unsupported feature document {} v{}",
                self.format, self.version
            )));
        }
        let recomputed = schema_fingerprint(&self.schema.groups);
        self.schema.check(&recomputed)?;
        let stopwords = self
            .stopwords
            .map(|s| Lexicon::from_patterns(&s.name, s.entries))
            .transpose()?;
        if self.config.text.is_some() != self.terms.is_some() {
            return Err(Error::data("feature document text config and vocabulary disagree"));
        }
        Ok(FittedPipeline {
            config: self.config,
            stopwords,
            vocabulary: self.terms,
            lsa: self.lsa,
            schema: self.schema,
            notes: self.notes,
        })
    }
}
