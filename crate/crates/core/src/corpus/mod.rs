//! Media-session data model, JSON-lines ingestion and the session filter.

mod io;
pub mod synth;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::{tag_comment_negative, Lexicon};

pub use io::{load_corpus, parse_corpus, to_jsonl, write_corpus};
pub use synth::{generate_synthetic_corpus, ImageSignal, SyntheticCorpus, SyntheticSpec};

/// Default minimum number of comments per session.
pub const DEFAULT_MIN_COMMENTS: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub author_id: String,
    /// Seconds since the Unix epoch.
    pub posted_at: i64,
    pub text: String,
    /// True iff the author is the profile owner.
    pub is_owner: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OwnerStats {
    pub followers: u64,
    pub following: u64,
    pub media_count: u64,
    /// Likes on this media object.
    pub likes: u64,
}

/// One posted image with its caption, owner statistics and comment stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaSession {
    pub session_id: String,
    pub owner_id: String,
    pub caption: String,
    pub post_time: i64,
    /// One category set per image rater; empty before image labelling.
    pub image_category_votes: Vec<Vec<String>>,
    pub owner_stats: OwnerStats,
    /// Sorted non-decreasing by `posted_at`.
    pub comments: Vec<Comment>,
}

impl MediaSession {
    pub fn comment_texts(&self) -> impl Iterator<Item = &str> {
        self.comments.iter().map(|c| c.text.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub sessions: Vec<MediaSession>,
    pub provenance: String,
    pub ingest_warnings: Vec<String>,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate session ids.
    pub fn new(sessions: Vec<MediaSession>, provenance: impl Into<String>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for s in &sessions {
            if !seen.insert(s.session_id.as_str()) {
                return Err(Error::data(format!("duplicate session_id {:?}", s.session_id)));
            }
        }
        Ok(Corpus {
            sessions,
            provenance: provenance.into(),
            ingest_warnings: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.sessions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }

    pub fn get(&self, session_id: &str) -> Option<&MediaSession> {
        self.sessions.iter().find(|s| s.session_id == session_id)
    }
}

/// Keeps sessions with at least `min_comments` comments and at least one
/// non-owner comment tagged negative against `profanity`.
pub fn filter_sessions(corpus: &Corpus, min_comments: usize, profanity: &Lexicon) -> Result<Corpus> {
    if min_comments == 0 {
        return Err(Error::invalid("min_comments must be at least 1"));
    }
    let sessions = corpus
        .sessions
        .iter()
        .filter(|s| {
            s.comments.len() >= min_comments
                && s
                    .comments
                    .iter()
                    .any(|c| !c.is_owner && tag_comment_negative(c, profanity))
        })
        .cloned()
        .collect();
    Ok(Corpus {
        sessions,
        provenance: format!(
            "{} | filtered: min_comments={min_comments}, profanity={}",
            corpus.provenance, profanity.name
        ),
        ingest_warnings: corpus.ingest_warnings.clone(),
    })
}

/// Copy of `session` holding only its `k` earliest comments.
pub fn truncate_comments(session: &MediaSession, k: usize) -> MediaSession {
    let mut out = session.clone();
    out.comments.truncate(k);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn session_with(id: &str, texts: &[(&str, bool)]) -> MediaSession {
        MediaSession {
            session_id: id.to_string(),
            owner_id: "owner".into(),
            caption: "a caption".into(),
            post_time: 100,
            image_category_votes: vec![],
            owner_stats: OwnerStats::default(),
            comments: texts
                .iter()
                .enumerate()
                .map(|(i, (t, owner))| Comment {
                    author_id: if *owner { "owner".into() } else { format!("u{i}") },
                    posted_at: 100 + 10 * i as i64,
                    text: t.to_string(),
                    is_owner: *owner,
                })
                .collect(),
        }
    }

    fn profanity() -> Lexicon {
        Lexicon::from_patterns("profanity", ["damn", "kill*"]).unwrap()
    }

    fn mixed_corpus() -> Corpus {
        let mut short = vec![("nice", false); 13];
        short.push(("damn", false));
        let mut owner_only = vec![("nice", false); 14];
        owner_only.push(("damn", true));
        let mut ok = vec![("nice", false); 14];
        ok.push(("damn it", false));
        Corpus::new(
            vec![
                session_with("short", &short),
                session_with("owner_only", &owner_only),
                session_with("ok", &ok),
            ],
            "test",
        )
        .unwrap()
    }

    #[test]
    fn filter_rules() {
        let filtered = filter_sessions(&mixed_corpus(), 15, &profanity()).unwrap();
        let ids: Vec<_> = filtered.sessions.iter().map(|s| s.session_id.as_str()).collect();
        assert_eq!(ids, vec!["ok"]);
        assert!(filter_sessions(&mixed_corpus(), 0, &profanity()).is_err());
    }

    #[test]
    fn filter_is_idempotent() {
        let once = filter_sessions(&mixed_corpus(), 15, &profanity()).unwrap();
        let twice = filter_sessions(&once, 15, &profanity()).unwrap();
        assert_eq!(once.sessions, twice.sessions);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let s = session_with("dup", &[("x", false)]);
        let err = Corpus::new(vec![s.clone(), s], "t").unwrap_err();
        assert!(err.to_string().contains("dup"));
    }

    #[test]
    fn truncate_cases() {
        let texts: Vec<(&str, bool)> = vec![("c", false); 20];
        let s = session_with("s", &texts);
        let t = truncate_comments(&s, 5);
        assert_eq!(t.comments, s.comments[..5].to_vec());
        let short = session_with("s", &[("a", false); 3]);
        assert_eq!(truncate_comments(&short, 10).comments.len(), 3);
        let empty = truncate_comments(&s, 0);
        assert!(empty.comments.is_empty());
        assert_eq!(empty.caption, s.caption);
        assert_eq!(empty.post_time, s.post_time);
    }

    proptest! {
        #[test]
        fn truncation_composes(n in 0usize..30, k1 in 0usize..35, k2 in 0usize..35) {
            let (k1, k2) = if k2 <= k1 { (k1, k2) } else { (k2, k1) };
            let texts: Vec<(&str, bool)> = vec![("w", false); n];
            let s = session_with("p", &texts);
            prop_assert_eq!(truncate_comments(&truncate_comments(&s, k1), k2), truncate_comments(&s, k2));
        }
    }
}
