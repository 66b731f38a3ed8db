use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::files::ImageLabelRecord;
use crate::error::{Error, Result};

/// Human-labelled image content categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageCategory {
    Person,
    Text,
    Sport,
    Celebrity,
    Clothes,
    Tattoo,
    Car,
    Bike,
    Nature,
    Food,
    Drugs,
    Cartoon,
    Unknown,
}

impl ImageCategory {
    pub const ALL: [ImageCategory; 13] = [
        ImageCategory::Person,
        ImageCategory::Text,
        ImageCategory::Sport,
        ImageCategory::Celebrity,
        ImageCategory::Clothes,
        ImageCategory::Tattoo,
        ImageCategory::Car,
        ImageCategory::Bike,
        ImageCategory::Nature,
        ImageCategory::Food,
        ImageCategory::Drugs,
        ImageCategory::Cartoon,
        ImageCategory::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ImageCategory::Person => "person",
            ImageCategory::Text => "text",
            ImageCategory::Sport => "sport",
            ImageCategory::Celebrity => "celebrity",
            ImageCategory::Clothes => "clothes",
            ImageCategory::Tattoo => "tattoo",
            ImageCategory::Car => "car",
            ImageCategory::Bike => "bike",
            ImageCategory::Nature => "nature",
            ImageCategory::Food => "food",
            ImageCategory::Drugs => "drugs",
            ImageCategory::Cartoon => "cartoon",
            ImageCategory::Unknown => "unknown",
        }
    }

    /// Position in [`ImageCategory::ALL`].
    pub fn index(self) -> usize {
        ImageCategory::ALL
            .iter()
            .position(|&c| c == self)
            .expect("every category is listed")
    }
}

impl std::fmt::Display for ImageCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ImageCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_lowercase();
        match norm.as_str() {
            "dont know" | "don't know" | "do not know" | "dont_know" => return Ok(ImageCategory::Unknown),
            _ => {}
        }
        ImageCategory::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == norm)
            .ok_or_else(|| Error::data(format!("unknown image category {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageLabel {
    pub session_id: String,
    pub category: ImageCategory,
    pub vote_counts: BTreeMap<ImageCategory, usize>,
}

impl ImageLabel {
    /// Every category sharing the maximal vote count.
    pub fn majority_categories(&self) -> Vec<ImageCategory> {
        let best = self.vote_counts.values().copied().max().unwrap_or(0);
        self.vote_counts
            .iter()
            .filter(|(_, &c)| c == best)
            .map(|(&k, _)| k)
            .collect()
    }
}

/// Majority category over raters; ties go to the lexicographically
/// smallest category name.
pub fn image_category_majority(session_id: &str, votes: &[Vec<ImageCategory>]) -> Result<ImageLabel> {
    if votes.is_empty() {
        return Err(Error::data(format!("session {session_id}: no image raters")));
    }
    let mut vote_counts: BTreeMap<ImageCategory, usize> = BTreeMap::new();
    for rater in votes {
        if rater.is_empty() {
            return Err(Error::data(format!(
                "session {session_id}: a rater gave no image category"
            )));
        }
        let unique: BTreeSet<ImageCategory> = rater.iter().copied().collect();
        for c in unique {
            *vote_counts.entry(c).or_default() += 1;
        }
    }
    let best = vote_counts.values().copied().max().unwrap_or(0);
    let category = vote_counts
        .iter()
        .filter(|(_, &c)| c == best)
        .map(|(&k, _)| k)
        .min_by_key(|k| k.as_str())
        .expect("at least one category counted");
    Ok(ImageLabel {
        session_id: session_id.to_string(),
        category,
        vote_counts,
    })
}

/// Resolves per-rater string category sets, e.g. a session's
/// `image_category_votes`.
pub fn image_label_from_votes(session_id: &str, votes: &[Vec<String>]) -> Result<ImageLabel> {
    let parsed = votes
        .iter()
        .map(|rater| rater.iter().map(|c| c.parse()).collect::<Result<Vec<ImageCategory>>>())
        .collect::<Result<Vec<_>>>()?;
    image_category_majority(session_id, &parsed)
}

/// Groups image label records by session and resolves each majority.
pub fn resolve_image_labels(records: &[ImageLabelRecord]) -> Result<BTreeMap<String, ImageLabel>> {
    let mut groups: BTreeMap<&str, BTreeMap<&str, Vec<String>>> = BTreeMap::new();
    for r in records {
        let raters = groups.entry(r.session_id.as_str()).or_default();
        if raters.insert(r.rater_id.as_str(), r.categories.clone()).is_some() {
            return Err(Error::data(format!(
                "duplicate image rater {} for session {}",
                r.rater_id, r.session_id
            )));
        }
    }
    groups
        .into_iter()
        .map(|(sid, raters)| {
            let votes: Vec<Vec<String>> = raters.into_values().collect();
            Ok((sid.to_string(), image_label_from_votes(sid, &votes)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ImageCategory::*;

    #[test]
    fn tie_goes_to_lexicographic_first() {
        let l = image_category_majority("s", &[vec![Person], vec![Person, Text], vec![Text]]).unwrap();
        assert_eq!(l.vote_counts[&Person], 2);
        assert_eq!(l.vote_counts[&Text], 2);
        assert_eq!(l.category, Person);
        assert_eq!(l.majority_categories(), vec![Person, Text]);
        // "bike" sorts before "drugs" even though Drugs is declared later
        let l = image_category_majority("s", &[vec![Drugs], vec![Bike]]).unwrap();
        assert_eq!(l.category, Bike);
    }

    #[test]
    fn plain_majorities() {
        let l = image_category_majority("s", &[vec![Drugs], vec![Drugs], vec![Car]]).unwrap();
        assert_eq!(l.category, Drugs);
        let l = image_category_majority("s", &[vec![Unknown], vec![Unknown], vec![Unknown]]).unwrap();
        assert_eq!(l.category, Unknown);
    }

    #[test]
    fn parsing_and_errors() {
        assert_eq!("Dont Know".parse::<ImageCategory>().unwrap(), Unknown);
        assert_eq!("TATTOO".parse::<ImageCategory>().unwrap(), Tattoo);
        assert!("spaceship".parse::<ImageCategory>().is_err());
        assert!(image_category_majority("s", &[]).is_err());
        assert!(image_category_majority("s", &[vec![]]).is_err());
        for c in ImageCategory::ALL {
            assert_eq!(ImageCategory::ALL[c.index()], c);
        }
    }

    #[test]
    fn duplicate_category_from_one_rater_counts_once() {
        let l = image_category_majority("s", &[vec![Car, Car], vec![Food]]).unwrap();
        assert_eq!(l.vote_counts[&Car], 1);
    }
}
