use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use super::{Comment, Corpus, MediaSession, OwnerStats};
use crate::error::{Error, Result};
use crate::util::write_atomic;

const SESSION_FIELDS: &[&str] = &[
    "session_id",
    "owner_id",
    "caption",
    "post_time",
    "likes",
    "followers",
    "following",
    "media_count",
    "comments",
    "image_category_votes",
];
const COMMENT_FIELDS: &[&str] = &["author_id", "posted_at", "text", "is_owner"];

/// Reads a JSON-lines session file.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, &path.display().to_string())
}

/// Parses JSON-lines session records. Malformed lines are skipped with a
/// warning; duplicate ids and an empty result are errors.
pub fn parse_corpus(text: &str, provenance: &str) -> Result<Corpus> {
    let mut sessions = Vec::new();
    let mut warnings = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        match parse_session(line, lineno, &mut warnings) {
            Ok(session) => sessions.push(session),
            Err(msg) => warnings.push(format!("line {lineno}: skipped: {msg}")),
        }
    }
    if sessions.is_empty() {
        return Err(Error::data(format!("{provenance}: no parseable sessions")));
    }
    let mut corpus = Corpus::new(sessions, provenance)?;
    corpus.ingest_warnings = warnings;
    Ok(corpus)
}

fn parse_session(line: &str, lineno: usize, warnings: &mut Vec<String>) -> Result<MediaSession, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("malformed json: {e}"))?;
    let obj = value.as_object().ok_or("record is not a json object")?;
    warn_unknown(obj, SESSION_FIELDS, &format!("line {lineno}"), warnings);

    let session_id = required_str(obj, "session_id")?;
    let ctx = format!("line {lineno} (session {session_id})");
    let owner_id = optional_str(obj, "owner_id").unwrap_or_default();
    let caption = optional_str(obj, "caption").unwrap_or_default();
    let post_time = timestamp(obj.get("post_time").ok_or("missing post_time")?)
        .map_err(|e| format!("post_time: {e}"))?;

    let mut missing_stats = Vec::new();
    let mut stat = |key: &str| -> Result<u64, String> {
        match obj.get(key) {
            None | Some(Value::Null) => {
                missing_stats.push(key.to_string());
                Ok(0)
            }
            Some(v) => count(v).map_err(|e| format!("{key}: {e}")),
        }
    };
    let owner_stats = OwnerStats {
        likes: stat("likes")?,
        followers: stat("followers")?,
        following: stat("following")?,
        media_count: stat("media_count")?,
    };
    if !missing_stats.is_empty() {
        warnings.push(format!(
            "{ctx}: missing owner stats {} set to 0",
            missing_stats.join(",")
        ));
    }

    let mut comments = Vec::new();
    if let Some(raw) = obj.get("comments") {
        let arr = raw.as_array().ok_or("comments is not an array")?;
        for (ci, c) in arr.iter().enumerate() {
            let cobj = c.as_object().ok_or_else(|| format!("comment {ci} is not an object"))?;
            warn_unknown(cobj, COMMENT_FIELDS, &format!("{ctx} comment {ci}"), warnings);
            let text = optional_str(cobj, "text").unwrap_or_default();
            if text.is_empty() {
                warnings.push(format!("{ctx}: comment {ci} has empty text"));
            }
            comments.push(Comment {
                author_id: optional_str(cobj, "author_id").unwrap_or_default(),
                posted_at: timestamp(cobj.get("posted_at").ok_or_else(|| format!("comment {ci} missing posted_at"))?)
                    .map_err(|e| format!("comment {ci} posted_at: {e}"))?,
                text,
                is_owner: cobj.get("is_owner").and_then(Value::as_bool).unwrap_or(false),
            });
        }
    }
    if comments.windows(2).any(|w| w[0].posted_at > w[1].posted_at) {
        // Stable sort keeps file order among equal timestamps.
        comments.sort_by_key(|c| c.posted_at);
        warnings.push(format!("{ctx}: comments re-sorted by posted_at"));
    }
    if let Some(first) = comments.first() {
        if post_time > first.posted_at {
            warnings.push(format!("{ctx}: post_time is after the first comment"));
        }
    }

    let mut image_category_votes = Vec::new();
    if let Some(raw) = obj.get("image_category_votes") {
        let arr = raw.as_array().ok_or("image_category_votes is not an array")?;
        for rater in arr {
            let cats = rater.as_array().ok_or("image_category_votes entry is not an array")?;
            let mut set = Vec::new();
            for c in cats {
                set.push(c.as_str().ok_or("image category is not a string")?.to_string());
            }
            image_category_votes.push(set);
        }
    }

    Ok(MediaSession {
        session_id,
        owner_id,
        caption,
        post_time,
        image_category_votes,
        owner_stats,
        comments,
    })
}

fn warn_unknown(obj: &Map<String, Value>, known: &[&str], ctx: &str, warnings: &mut Vec<String>) {
    for key in obj.keys() {
        if !known.contains(&key.as_str()) {
            warnings.push(format!("{ctx}: unknown field {key:?} ignored"));
        }
    }
}

fn required_str(obj: &Map<String, Value>, key: &str) -> Result<String, String> {
    optional_str(obj, key).ok_or_else(|| format!("missing string field {key}"))
}

fn optional_str(obj: &Map<String, Value>, key: &str) -> Option<String> {
    obj.get(key).and_then(Value::as_str).map(str::to_string)
}

/// Whole seconds since the epoch; fractional seconds are dropped.
fn timestamp(v: &Value) -> Result<i64, String> {
    let n = v.as_f64().ok_or("not a number")?;
    if !n.is_finite() || n < 0.0 {
        return Err(format!("invalid timestamp {v}"));
    }
    if let Some(i) = v.as_i64() {
        return Ok(i);
    }
    Ok(n.floor() as i64)
}

fn count(v: &Value) -> Result<u64, String> {
    if let Some(u) = v.as_u64() {
        return Ok(u);
    }
    match v.as_f64() {
        Some(f) if f.is_finite() && f >= 0.0 => Ok(f.floor() as u64),
        _ => Err(format!("invalid count {v}")),
    }
}

#[derive(Serialize)]
struct CommentRecord<'a> {
    author_id: &'a str,
    posted_at: i64,
    text: &'a str,
    is_owner: bool,
}

#[derive(Serialize)]
struct SessionRecord<'a> {
    session_id: &'a str,
    owner_id: &'a str,
    caption: &'a str,
    post_time: i64,
    likes: u64,
    followers: u64,
    following: u64,
    media_count: u64,
    comments: Vec<CommentRecord<'a>>,
    image_category_votes: &'a [Vec<String>],
}

/// Serializes sessions as JSON lines in the ingestion format.
pub fn to_jsonl(corpus: &Corpus) -> String {
    let mut out = String::new();
    for s in &corpus.sessions {
        let record = SessionRecord {
            session_id: &s.session_id,
            owner_id: &s.owner_id,
            caption: &s.caption,
            post_time: s.post_time,
            likes: s.owner_stats.likes,
            followers: s.owner_stats.followers,
            following: s.owner_stats.following,
            media_count: s.owner_stats.media_count,
            comments: s
                .comments
                .iter()
                .map(|c| CommentRecord {
                    author_id: &c.author_id,
                    posted_at: c.posted_at,
                    text: &c.text,
                    is_owner: c.is_owner,
                })
                .collect(),
            image_category_votes: &s.image_category_votes,
        };
        out.push_str(&serde_json::to_string(&record).expect("session records serialize"));
        out.push('\n');
    }
    out
}

pub fn write_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), to_jsonl(corpus).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINE_A: &str = r#"{"session_id":"a","owner_id":"o1","caption":"hi","post_time":10,"likes":3,"followers":5,"following":2,"media_count":9,"comments":[{"author_id":"u","posted_at":20,"text":"nice","is_owner":false}],"image_category_votes":[["person"],["person","text"]]}"#;
    const LINE_B: &str = r#"{"session_id":"b","owner_id":"o2","caption":"","post_time":0,"likes":0,"followers":0,"following":0,"media_count":0,"comments":[],"image_category_votes":[]}"#;
    const LINE_C: &str = r#"{"session_id":"c","owner_id":"o3","caption":"x","post_time":1,"likes":1,"followers":1,"following":1,"media_count":1,"comments":[{"author_id":"v","posted_at":5,"text":"b","is_owner":true},{"author_id":"w","posted_at":3,"text":"a","is_owner":false}]}"#;

    #[test]
    fn three_valid_lines() {
        let text = format!("{LINE_A}\n{LINE_B}\n{}\n", LINE_A.replace("\"a\"", "\"z\""));
        let corpus = parse_corpus(&text, "t").unwrap();
        assert_eq!(corpus.len(), 3);
        assert!(corpus.ingest_warnings.is_empty(), "{:?}", corpus.ingest_warnings);
        let a = &corpus.sessions[0];
        assert_eq!(a.owner_stats.media_count, 9);
        assert_eq!(a.image_category_votes.len(), 2);
    }

    #[test]
    fn truncated_line_is_skipped() {
        let text = format!("{LINE_A}\n{}\n{LINE_B}\n", &LINE_A[..40]);
        let corpus = parse_corpus(&text, "t").unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.ingest_warnings.len(), 1);
        assert!(corpus.ingest_warnings[0].starts_with("line 2"));
    }

    #[test]
    fn duplicate_id_is_an_error() {
        let err = parse_corpus(&format!("{LINE_A}\n{LINE_A}\n"), "t").unwrap_err();
        assert!(err.to_string().contains("\"a\""));
    }

    #[test]
    fn no_sessions_is_an_error() {
        assert!(parse_corpus("not json\n", "t").is_err());
        assert!(parse_corpus("", "t").is_err());
    }

    #[test]
    fn out_of_order_comments_are_sorted() {
        let corpus = parse_corpus(LINE_C, "t").unwrap();
        let times: Vec<i64> = corpus.sessions[0].comments.iter().map(|c| c.posted_at).collect();
        assert_eq!(times, vec![3, 5]);
        assert!(corpus.ingest_warnings.iter().any(|w| w.contains("re-sorted")));
    }

    #[test]
    fn lenient_fields() {
        let line = r#"{"session_id":"d","post_time":12.9,"extra":1,"comments":[{"author_id":"u","posted_at":13.5,"text":"","is_owner":false}]}"#;
        let corpus = parse_corpus(line, "t").unwrap();
        let s = &corpus.sessions[0];
        assert_eq!(s.post_time, 12);
        assert_eq!(s.comments[0].posted_at, 13);
        assert_eq!(s.owner_stats, OwnerStats::default());
        let w = corpus.ingest_warnings.join("\n");
        assert!(w.contains("unknown field \"extra\""));
        assert!(w.contains("missing owner stats"));
        assert!(w.contains("empty text"));
    }

    #[test]
    fn negative_timestamp_skips_line() {
        let line = LINE_B.replace("\"post_time\":0", "\"post_time\":-5");
        let text = format!("{LINE_A}\n{line}\n");
        let corpus = parse_corpus(&text, "t").unwrap();
        assert_eq!(corpus.len(), 1);
    }

    #[test]
    fn write_then_load_is_identity() {
        let corpus = parse_corpus(&format!("{LINE_A}\n{LINE_B}\n{LINE_C}\n"), "t").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        write_corpus(&corpus, &path).unwrap();
        let back = load_corpus(&path).unwrap();
        assert_eq!(back.sessions, corpus.sessions);
        assert!(back.ingest_warnings.is_empty());
    }
}
