use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::Lexicon;

/// Lowercases, splits on whitespace and strips non-alphanumeric characters
/// from both ends of each token, dropping tokens that end up empty.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|raw| raw.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

/// How a text segment becomes terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermOptions {
    pub use_bigrams: bool,
}

/// Unigrams (and adjacent bigrams) of one segment after stop-word removal.
/// Bigrams never span two segments.
pub fn segment_terms(text: &str, options: TermOptions, stopwords: Option<&Lexicon>) -> Vec<String> {
    let tokens: Vec<String> = tokenize(text)
        .into_iter()
        .filter(|t| stopwords.is_none_or(|s| !s.matches(t)))
        .collect();
    let mut terms = tokens.clone();
    if options.use_bigrams {
        terms.extend(tokens.windows(2).map(|w| format!("{} {}", w[0], w[1])));
    }
    terms
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_terms(terms: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::data(format!("duplicate vocabulary term {t:?}")));
            }
        }
        Ok(Vocabulary { terms, index })
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn position(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.index.contains_key(term)
    }
}

impl Serialize for Vocabulary {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.terms.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<String>::deserialize(d)?;
        Vocabulary::from_terms(terms).map_err(serde::de::Error::custom)
    }
}

/// Builds a vocabulary from training documents, each a list of text
/// segments. Terms need document frequency `>= min_df` and are ordered by
/// descending frequency, then lexicographically.
pub fn build_vocabulary<S: AsRef<str>>(
    documents: &[Vec<S>],
    options: TermOptions,
    stopwords: Option<&Lexicon>,
    min_df: usize,
) -> Result<Vocabulary> {
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in documents {
        let mut seen: HashSet<String> = HashSet::new();
        for segment in doc {
            seen.extend(segment_terms(segment.as_ref(), options, stopwords));
        }
        for term in seen {
            *df.entry(term).or_default() += 1;
        }
    }
    let mut kept: Vec<(String, usize)> = df.into_iter().filter(|(_, n)| *n >= min_df.max(1)).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if kept.is_empty() {
        return Err(Error::data("empty vocabulary"));
    }
    Vocabulary::from_terms(kept.into_iter().map(|(t, _)| t).collect())
}

/// Term counts of a document's segments over `vocab`, optionally scaled so
/// the components sum to one. An all-zero vector stays zero.
pub fn vectorize_text<S: AsRef<str>>(
    segments: &[S],
    vocab: &Vocabulary,
    options: TermOptions,
    stopwords: Option<&Lexicon>,
    l1_normalize: bool,
) -> Vec<f64> {
    let mut counts = vec![0.0; vocab.len()];
    for segment in segments {
        for term in segment_terms(segment.as_ref(), options, stopwords) {
            if let Some(i) = vocab.position(&term) {
                counts[i] += 1.0;
            }
        }
    }
    if l1_normalize {
        l1_normalize_in_place(&mut counts);
    }
    counts
}

pub fn l1_normalize_in_place(values: &mut [f64]) {
    let total: f64 = values.iter().map(|v| v.abs()).sum();
    if total > 0.0 {
        values.iter_mut().for_each(|v| *v /= total);
    }
}
