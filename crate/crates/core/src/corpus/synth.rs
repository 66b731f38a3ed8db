//! Planted-signal synthetic corpora with matching crowd-label files.
//!
//! Positive (bullying) sessions draw a configurable share of their comment
//! tokens from a bully vocabulary and comment faster; every session carries
//! at least one profane non-owner comment so it survives the session filter.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_distr::{Distribution, Exp, LogNormal};
use serde::{Deserialize, Serialize};

use super::{Comment, Corpus, MediaSession, OwnerStats};
use crate::error::{Error, Result};
use crate::labels::{ImageCategory, ImageLabelRecord, LabelRecord};
use crate::numerics::seeded_rng;

pub const BULLY_WORDS: &[&str] = &[
    "loser", "ugly", "stupid", "idiot", "freak", "worthless", "pathetic", "disgusting", "weirdo",
    "creep", "dumb", "fatso", "moron", "clown", "trash", "nobody", "failure", "gross", "lame",
    "hideous",
];

pub const PROFANE_WORDS: &[&str] = &["damn", "hell", "crap", "wtf", "shit"];

const NEUTRAL_WORDS: &[&str] = &[
    "photo", "picture", "beach", "sunset", "friends", "party", "summer", "music", "coffee",
    "morning", "weekend", "city", "night", "dinner", "style", "shoes", "dress", "hair", "smile",
    "family", "trip", "travel", "game", "team", "school", "class", "work", "home", "dog", "cat",
    "puppy", "flowers", "sky", "ocean", "car", "ride", "bike", "park", "lake", "snow", "rain",
    "pizza", "cake", "birthday", "concert", "song", "movie", "show", "dance", "gym", "run",
    "outfit", "color", "light", "view", "mountain", "road", "street", "crew", "squad", "vibes",
    "cool", "nice", "wow", "lol", "haha", "omg", "yes", "totally", "really", "looks", "great",
    "awesome", "cute", "pretty", "love", "miss", "best", "fun", "today", "tonight", "tomorrow",
    "later", "soon", "again", "always", "forever", "new", "old", "little", "big", "happy",
    "sweet", "amazing", "goals", "throwback", "selfie", "sister", "brother", "mom", "dad",
];

/// How image categories relate to the label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageSignal {
    /// Category drawn uniformly, independent of the label.
    None,
    /// Positives are always `drugs`; negatives never are.
    Perfect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub sessions: usize,
    pub positive_fraction: f64,
    /// Share of a positive session's non-owner tokens taken from the bully vocabulary.
    pub bully_token_rate: f64,
    pub comments_min: usize,
    pub comments_max: usize,
    pub tokens_min: usize,
    pub tokens_max: usize,
    /// Mean comment interarrival time of positive sessions, seconds.
    pub positive_gap_mean: f64,
    pub negative_gap_mean: f64,
    pub raters: usize,
    /// Probability a rater's vote disagrees with ground truth.
    pub flip_rate: f64,
    /// Share of negative sessions that are aggressive without being bullying.
    pub aggression_extra_rate: f64,
    /// Per non-owner comment probability of carrying a profane word.
    pub profanity_rate: f64,
    pub owner_comment_rate: f64,
    pub image_signal: ImageSignal,
    pub image_raters: usize,
    /// Positive sessions' likes are divided by this factor.
    pub positive_likes_divisor: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            sessions: 1000,
            positive_fraction: 0.3,
            bully_token_rate: 0.3,
            comments_min: 15,
            comments_max: 40,
            tokens_min: 3,
            tokens_max: 10,
            positive_gap_mean: 1800.0,
            negative_gap_mean: 7200.0,
            raters: 5,
            flip_rate: 0.1,
            aggression_extra_rate: 0.3,
            profanity_rate: 0.2,
            owner_comment_rate: 0.1,
            image_signal: ImageSignal::None,
            image_raters: 3,
            positive_likes_divisor: 1.0,
        }
    }
}

impl SyntheticSpec {
    fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} = {v} outside [0, 1]")))
            }
        };
        unit("positive_fraction", self.positive_fraction)?;
        unit("bully_token_rate", self.bully_token_rate)?;
        unit("flip_rate", self.flip_rate)?;
        unit("aggression_extra_rate", self.aggression_extra_rate)?;
        unit("profanity_rate", self.profanity_rate)?;
        unit("owner_comment_rate", self.owner_comment_rate)?;
        if self.sessions == 0 {
            return Err(Error::invalid("sessions must be positive"));
        }
        if self.comments_min == 0 || self.comments_min > self.comments_max {
            return Err(Error::invalid("need 1 <= comments_min <= comments_max"));
        }
        if self.tokens_min == 0 || self.tokens_min > self.tokens_max {
            return Err(Error::invalid("need 1 <= tokens_min <= tokens_max"));
        }
        if !(self.positive_gap_mean > 0.0 && self.negative_gap_mean > 0.0) {
            return Err(Error::invalid("interarrival means must be positive"));
        }
        if self.raters == 0 || self.image_raters == 0 {
            return Err(Error::invalid("rater counts must be positive"));
        }
        if !(self.positive_likes_divisor > 0.0) {
            return Err(Error::invalid("positive_likes_divisor must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCorpus {
    pub corpus: Corpus,
    pub labels: Vec<LabelRecord>,
    pub image_labels: Vec<ImageLabelRecord>,
    /// Ground-truth bullying flag per session, in corpus order.
    pub truth: Vec<bool>,
}

pub fn generate_synthetic_corpus(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut rng = seeded_rng(seed, "synth/corpus");
    let n_pos = (spec.sessions as f64 * spec.positive_fraction).round() as usize;
    let mut truth: Vec<bool> = (0..spec.sessions).map(|i| i < n_pos).collect();
    truth.shuffle(&mut rng);

    let exp = |mean: f64| Exp::new(1.0 / mean).expect("positive rate");
    let pos_gap = exp(spec.positive_gap_mean);
    let neg_gap = exp(spec.negative_gap_mean);
    let followers = LogNormal::<f64>::new(6.0, 1.5).expect("valid lognormal");
    let likes = LogNormal::<f64>::new(3.5, 1.0).expect("valid lognormal");

    let mut sessions = Vec::with_capacity(spec.sessions);
    let mut labels = Vec::with_capacity(spec.sessions * spec.raters);
    let mut image_labels = Vec::with_capacity(spec.sessions * spec.image_raters);

    for (i, &positive) in truth.iter().enumerate() {
        let session_id = format!("s{i:05}");
        let owner_id = format!("owner{i:05}");
        let post_time = 1_400_000_000 + rng.random_range(0..31_536_000i64);

        let n_comments = rng.random_range(spec.comments_min..=spec.comments_max);
        let gap_dist = if positive { pos_gap } else { neg_gap };
        let mut t = post_time;
        let mut comments = Vec::with_capacity(n_comments);
        for _ in 0..n_comments {
            t += gap_dist.sample(&mut rng).round() as i64;
            let is_owner = rng.random::<f64>() < spec.owner_comment_rate;
            let n_tokens = rng.random_range(spec.tokens_min..=spec.tokens_max);
            let mut words: Vec<&str> = (0..n_tokens)
                .map(|_| {
                    if positive && !is_owner && rng.random::<f64>() < spec.bully_token_rate {
                        *BULLY_WORDS.choose(&mut rng).expect("non-empty")
                    } else {
                        *NEUTRAL_WORDS.choose(&mut rng).expect("non-empty")
                    }
                })
                .collect();
            if !is_owner && rng.random::<f64>() < spec.profanity_rate {
                let at = rng.random_range(0..=words.len());
                words.insert(at, PROFANE_WORDS.choose(&mut rng).expect("non-empty"));
            }
            comments.push(Comment {
                author_id: if is_owner { owner_id.clone() } else { format!("user{}", rng.random_range(0..5000)) },
                posted_at: t,
                text: words.join(" "),
                is_owner,
            });
        }
        // Every session keeps at least one profane non-owner comment.
        if !comments
            .iter()
            .any(|c| !c.is_owner && PROFANE_WORDS.iter().any(|p| c.text.split(' ').any(|w| w == *p)))
        {
            let idx = rng.random_range(0..comments.len());
            let c = &mut comments[idx];
            c.is_owner = false;
            c.author_id = format!("user{}", rng.random_range(0..5000));
            c.text = format!("{} {}", c.text, PROFANE_WORDS.choose(&mut rng).expect("non-empty"));
        }

        let caption_len = rng.random_range(2..=6);
        let caption: Vec<&str> = (0..caption_len)
            .map(|_| *NEUTRAL_WORDS.choose(&mut rng).expect("non-empty"))
            .collect();

        let mut like_count = likes.sample(&mut rng);
        if positive {
            like_count /= spec.positive_likes_divisor;
        }
        let owner_stats = OwnerStats {
            followers: followers.sample(&mut rng).round() as u64,
            following: followers.sample(&mut rng).round() as u64 / 2,
            media_count: rng.random_range(10..2000),
            likes: like_count.round() as u64,
        };

        let category = match spec.image_signal {
            ImageSignal::Perfect if positive => ImageCategory::Drugs,
            ImageSignal::Perfect => {
                let others: Vec<ImageCategory> = ImageCategory::ALL
                    .iter()
                    .copied()
                    .filter(|c| *c != ImageCategory::Drugs)
                    .collect();
                *others.choose(&mut rng).expect("non-empty")
            }
            ImageSignal::None => *ImageCategory::ALL.choose(&mut rng).expect("non-empty"),
        };
        let mut image_votes = Vec::with_capacity(spec.image_raters);
        for r in 0..spec.image_raters {
            let cats = vec![category.as_str().to_string()];
            image_labels.push(ImageLabelRecord {
                session_id: session_id.clone(),
                rater_id: format!("img{r}"),
                categories: cats.clone(),
            });
            image_votes.push(cats);
        }

        let aggressive = positive || rng.random::<f64>() < spec.aggression_extra_rate;
        for r in 0..spec.raters {
            let trust = 0.6 + 0.4 * rng.random::<f64>();
            let bullying_vote = positive ^ (rng.random::<f64>() < spec.flip_rate);
            let aggression_vote = aggressive ^ (rng.random::<f64>() < spec.flip_rate);
            labels.push(LabelRecord {
                session_id: session_id.clone(),
                rater_id: format!("rater{r}"),
                trust,
                aggression_vote,
                bullying_vote,
            });
        }

        sessions.push(MediaSession {
            session_id,
            owner_id,
            caption: caption.join(" "),
            post_time,
            image_category_votes: image_votes,
            owner_stats,
            comments,
        });
    }

    let corpus = Corpus::new(sessions, format!("synthetic seed={seed}"))?;
    Ok(SyntheticCorpus {
        corpus,
        labels,
        image_labels,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{filter_sessions, to_jsonl};
    use crate::lexicon::Lexicon;

    fn small(n: usize) -> SyntheticSpec {
        SyntheticSpec {
            sessions: n,
            ..SyntheticSpec::default()
        }
    }

    #[test]
    fn exact_positive_count_and_determinism() {
        let spec = small(100);
        let a = generate_synthetic_corpus(&spec, 7).unwrap();
        assert_eq!(a.truth.iter().filter(|&&t| t).count(), 30);
        let b = generate_synthetic_corpus(&spec, 7).unwrap();
        assert_eq!(to_jsonl(&a.corpus), to_jsonl(&b.corpus));
        assert_eq!(a.labels, b.labels);
        let c = generate_synthetic_corpus(&spec, 8).unwrap();
        assert_ne!(to_jsonl(&a.corpus), to_jsonl(&c.corpus));
    }

    #[test]
    fn zero_flip_rate_votes_equal_truth() {
        let spec = SyntheticSpec {
            flip_rate: 0.0,
            ..small(50)
        };
        let s = generate_synthetic_corpus(&spec, 1).unwrap();
        for (i, chunk) in s.labels.chunks(spec.raters).enumerate() {
            assert!(chunk.iter().all(|r| r.bullying_vote == s.truth[i]));
        }
    }

    #[test]
    fn flipped_votes_follow_binomial_mean() {
        // 5 raters, flip 0.2: E[yes | positive] = 5 * 0.8 = 4.0
        let spec = SyntheticSpec {
            positive_fraction: 1.0,
            flip_rate: 0.2,
            comments_min: 2,
            comments_max: 3,
            ..small(1000)
        };
        let s = generate_synthetic_corpus(&spec, 3).unwrap();
        let yes = s.labels.iter().filter(|r| r.bullying_vote).count() as f64;
        let mean = yes / 1000.0;
        assert!((mean - 4.0).abs() <= 0.15, "mean yes votes {mean}");
    }

    #[test]
    fn sessions_survive_the_filter() {
        let s = generate_synthetic_corpus(&small(60), 5).unwrap();
        let filtered = filter_sessions(&s.corpus, 15, &Lexicon::bundled_profanity()).unwrap();
        assert_eq!(filtered.len(), 60);
    }

    #[test]
    fn invalid_specs() {
        let bad = SyntheticSpec {
            positive_fraction: 1.5,
            ..small(10)
        };
        assert!(generate_synthetic_corpus(&bad, 1).is_err());
        let bad = SyntheticSpec {
            comments_min: 5,
            comments_max: 4,
            ..small(10)
        };
        assert!(generate_synthetic_corpus(&bad, 1).is_err());
    }

    #[test]
    fn perfect_image_signal() {
        let spec = SyntheticSpec {
            image_signal: ImageSignal::Perfect,
            ..small(40)
        };
        let s = generate_synthetic_corpus(&spec, 2).unwrap();
        for (session, &t) in s.corpus.sessions.iter().zip(&s.truth) {
            assert_eq!(session.image_category_votes[0][0] == "drugs", t);
        }
    }
}
