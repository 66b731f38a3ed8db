//! Word lists: profanity, stop words and category dictionaries.
//!
//! Patterns are lowercase tokens; a trailing `*` turns a pattern into a
//! prefix match (`kill*` matches `killing`).

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{Comment, MediaSession};
use crate::error::{Error, Result};
use crate::features::tokenize;

const BUNDLED_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");
const BUNDLED_PROFANITY: &str = include_str!("../data/profanity_demo.txt");
const BUNDLED_CATEGORIES: &str = include_str!("../data/categories_demo.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    pub name: String,
    /// Lowercase patterns as written, including any trailing `*`.
    pub entries: BTreeSet<String>,
    literals: HashSet<String>,
    prefixes: Vec<String>,
}

impl Lexicon {
    /// Builds a lexicon from raw patterns, lowercasing and deduplicating.
    pub fn from_patterns<I, S>(name: &str, patterns: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut entries = BTreeSet::new();
        for raw in patterns {
            let pattern = raw.as_ref().trim().to_lowercase();
            if pattern.is_empty() {
                continue;
            }
            validate_pattern(&pattern)?;
            entries.insert(pattern);
        }
        if entries.is_empty() {
            return Err(Error::data(format!("lexicon {name:?} has no entries")));
        }
        let mut literals = HashSet::new();
        let mut prefixes = Vec::new();
        for e in &entries {
            match e.strip_suffix('*') {
                Some(p) => prefixes.push(p.to_string()),
                None => {
                    literals.insert(e.clone());
                }
            }
        }
        Ok(Lexicon {
            name: name.to_string(),
            entries,
            literals,
            prefixes,
        })
    }

    /// Parses the one-pattern-per-line format; `#` lines are comments.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        Lexicon::from_patterns(
            name,
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn bundled_stopwords() -> Self {
        Lexicon::parse("stopwords_en", BUNDLED_STOPWORDS).expect("bundled stopwords parse")
    }

    pub fn bundled_profanity() -> Self {
        Lexicon::parse("profanity_demo", BUNDLED_PROFANITY).expect("bundled profanity parses")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True if `token` (already lowercase) matches any pattern.
    pub fn matches(&self, token: &str) -> bool {
        self.literals.contains(token) || self.prefixes.iter().any(|p| token.starts_with(p.as_str()))
    }

    pub fn is_wildcard(pattern: &str) -> bool {
        pattern.ends_with('*')
    }
}

fn validate_pattern(pattern: &str) -> Result<()> {
    if pattern.chars().any(char::is_whitespace) {
        return Err(Error::data(format!("pattern {pattern:?} contains whitespace")));
    }
    let body = pattern.strip_suffix('*').unwrap_or(pattern);
    if body.is_empty() || body.contains('*') {
        return Err(Error::data(format!(
            "pattern {pattern:?}: wildcard only allowed as the final character of a non-empty prefix"
        )));
    }
    Ok(())
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Lexicon> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "lexicon".into());
    Lexicon::parse(&name, &text)
}

/// Named word categories, e.g. swear words or negations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryLexicon {
    pub categories: BTreeMap<String, Lexicon>,
}

impl CategoryLexicon {
    /// Parses `category: word1 word2 ...` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut categories = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, words) = line
                .split_once(':')
                .ok_or_else(|| Error::data(format!("line {}: expected \"category: words\"", idx + 1)))?;
            let name = name.trim().to_lowercase();
            if name.is_empty() {
                return Err(Error::data(format!("line {}: empty category name", idx + 1)));
            }
            if categories.contains_key(&name) {
                return Err(Error::data(format!("duplicate category {name:?}")));
            }
            let lex = Lexicon::from_patterns(&name, words.split_whitespace())?;
            categories.insert(name, lex);
        }
        if categories.is_empty() {
            return Err(Error::data("category lexicon has no categories"));
        }
        Ok(CategoryLexicon { categories })
    }

    pub fn bundled_demo() -> Self {
        CategoryLexicon::parse(BUNDLED_CATEGORIES).expect("bundled categories parse")
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.categories.keys().map(String::as_str)
    }
}

pub fn load_category_lexicon(path: impl AsRef<Path>) -> Result<CategoryLexicon> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    CategoryLexicon::parse(&text)
}

pub fn tag_comment_negative(comment: &Comment, profanity: &Lexicon) -> bool {
    text_has_match(&comment.text, profanity)
}

pub fn text_has_match(text: &str, lexicon: &Lexicon) -> bool {
    tokenize(text).iter().any(|t| lexicon.matches(t))
}

/// Percentage of the session's comments tagged negative.
pub fn session_negativity_pct(session: &MediaSession, profanity: &Lexicon) -> Result<f64> {
    if session.comments.is_empty() {
        return Err(Error::data(format!(
            "session {} has no comments",
            session.session_id
        )));
    }
    let negative = session
        .comments
        .iter()
        .filter(|c| tag_comment_negative(c, profanity))
        .count();
    Ok(100.0 * negative as f64 / session.comments.len() as f64)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCounts {
    pub counts: BTreeMap<String, u64>,
    pub word_count: u64,
}

/// Per-category token hits across all comment texts of a session.
pub fn category_counts(session: &MediaSession, cats: &CategoryLexicon) -> CategoryCounts {
    category_counts_for_texts(session.comment_texts(), cats)
}

pub fn category_counts_for_texts<'a>(
    texts: impl IntoIterator<Item = &'a str>,
    cats: &CategoryLexicon,
) -> CategoryCounts {
    let mut counts: BTreeMap<String, u64> = cats.categories.keys().map(|k| (k.clone(), 0)).collect();
    let mut word_count = 0;
    for text in texts {
        for token in tokenize(text) {
            word_count += 1;
            for (name, lex) in &cats.categories {
                if lex.matches(&token) {
                    *counts.get_mut(name).expect("key present") += 1;
                }
            }
        }
    }
    CategoryCounts { counts, word_count }
}
