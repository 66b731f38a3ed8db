//! Non-text features of a media session.

use serde::{Deserialize, Serialize};

use crate::corpus::MediaSession;
use crate::labels::{ImageCategory, ImageLabel};

/// 1 min, 5 min, 15 min, 30 min, 1 h, 1 day, 1 week, 30 days, 180 days.
pub const DEFAULT_TEMPORAL_THRESHOLDS: [i64; 9] =
    [60, 300, 900, 1800, 3600, 86_400, 604_800, 2_592_000, 15_552_000];

pub const ONE_HOUR: i64 = 3600;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalFeatures {
    /// `counts[i]` = number of interarrival gaps `<= thresholds[i]`.
    pub counts: Vec<u64>,
    /// Fraction of gaps `<= 3600` seconds.
    pub fraction_within_hour: f64,
    /// True when the session had fewer than two comments.
    pub insufficient_comments: bool,
}

impl TemporalFeatures {
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.counts.iter().map(|&c| c as f64).collect();
        v.push(self.fraction_within_hour);
        v
    }
}

/// Gaps between consecutive comments, in seconds.
pub fn interarrival_gaps(session: &MediaSession) -> Vec<i64> {
    session
        .comments
        .windows(2)
        .map(|w| w[1].posted_at - w[0].posted_at)
        .collect()
}

pub fn temporal_features(session: &MediaSession, thresholds: &[i64]) -> TemporalFeatures {
    let gaps = interarrival_gaps(session);
    if gaps.is_empty() {
        log::debug!(
            "session {} has fewer than two comments; temporal features are zero",
            session.session_id
        );
        return TemporalFeatures {
            counts: vec![0; thresholds.len()],
            fraction_within_hour: 0.0,
            insufficient_comments: true,
        };
    }
    let counts = thresholds
        .iter()
        .map(|&t| gaps.iter().filter(|&&g| g <= t).count() as u64)
        .collect();
    let within = gaps.iter().filter(|&&g| g <= ONE_HOUR).count();
    TemporalFeatures {
        counts,
        fraction_within_hour: within as f64 / gaps.len() as f64,
        insufficient_comments: false,
    }
}

pub const SOCIAL_FEATURE_NAMES: [&str; 4] = ["likes", "media_count", "following", "followers"];

/// `ln(1 + v)` of likes, media count, following and followers.
pub fn social_features(session: &MediaSession) -> [f64; 4] {
    let s = &session.owner_stats;
    [s.likes, s.media_count, s.following, s.followers].map(|v| (v as f64).ln_1p())
}

/// One-hot (or multi-hot over tied majorities) image category vector.
pub fn image_features(label: &ImageLabel, multi_hot: bool) -> Vec<f64> {
    let mut v = vec![0.0; ImageCategory::ALL.len()];
    if multi_hot {
        for c in label.majority_categories() {
            v[c.index()] = 1.0;
        }
    }
    v[label.category.index()] = 1.0;
    v
}

pub const POST_TIME_LEN: usize = 24 + 7;

/// Hour-of-day (24) then day-of-week (7, Monday first) one-hot, in UTC.
pub fn post_time_features(post_time: i64) -> Vec<f64> {
    let mut v = vec![0.0; POST_TIME_LEN];
    let hour = post_time.div_euclid(3600).rem_euclid(24) as usize;
    // 1970-01-01 was a Thursday (index 3 with Monday = 0).
    let weekday = (post_time.div_euclid(86_400) + 3).rem_euclid(7) as usize;
    v[hour] = 1.0;
    v[24 + weekday] = 1.0;
    v
}
