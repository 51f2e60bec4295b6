use serde::{Deserialize, Serialize};

use super::RawReview;
use crate::store::{Review, TrailRecord};

/// Function words per language. A word may appear in more than one list.
const STOPWORDS: &[(&str, &[&str])] = &[
    (
        "en",
        &[
            "the", "be", "to", "of", "and", "a", "in", "that", "have", "i", "it", "for", "not", "on", "with", "as",
            "you", "do", "at", "this", "but", "by", "from", "they", "we", "or", "an", "will", "my", "all", "would",
            "there", "their", "what", "so", "up", "out", "if", "about", "who", "which", "when", "can", "just", "into",
            "your", "some", "could", "them", "than", "then", "now", "only", "its", "over", "also", "after", "our",
            "even", "because", "any", "these", "most", "us", "is", "was", "are", "were", "been", "has", "had", "did",
            "very", "really", "much", "many", "more", "here", "where", "while", "every", "again", "still", "though",
            "enough", "too", "it's", "great", "nice", "good", "trail", "walk", "easy", "worth", "back", "well", "lot",
            "pretty",
        ],
    ),
    (
        "es",
        &[
            "el", "la", "los", "las", "de", "del", "que", "y", "en", "un", "una", "es", "por", "con", "para", "lo",
            "muy", "mucho", "pero", "se", "su", "al", "como", "más", "sendero", "bonito", "hay",
        ],
    ),
    (
        "fr",
        &[
            "le", "la", "les", "de", "des", "du", "et", "en", "un", "une", "est", "pour", "avec", "très", "bien",
            "pas", "sur", "dans", "au", "aux", "que", "qui", "ce", "sentier", "beau", "nous",
        ],
    ),
    (
        "de",
        &[
            "der",
            "die",
            "das",
            "und",
            "ist",
            "nicht",
            "zu",
            "ein",
            "eine",
            "mit",
            "sehr",
            "gut",
            "auf",
            "für",
            "den",
            "dem",
            "von",
            "wir",
            "es",
            "sich",
            "auch",
            "schöner",
            "wanderweg",
        ],
    ),
    (
        "it",
        &[
            "il",
            "lo",
            "gli",
            "di",
            "che",
            "e",
            "è",
            "per",
            "con",
            "non",
            "molto",
            "una",
            "della",
            "sentiero",
            "bello",
            "bellissimo",
        ],
    ),
    (
        "pt",
        &[
            "o", "os", "as", "de", "do", "da", "que", "e", "em", "um", "uma", "com", "não", "muito", "para", "trilha",
            "bonita",
        ],
    ),
];

/// How English the text looks, in `[0, 1]`.
///
/// Each word votes for every language whose function-word list contains it;
/// the score is the English tally over the sum of the English tally and the
/// best other tally. Text with no recognised words scores 0.5 when it is
/// written in ASCII letters and 0 otherwise.
pub fn english_score(text: &str) -> f64 {
    let lower = text.to_lowercase();
    let mut tally = [0usize; STOPWORDS.len()];
    let mut letters = (0usize, 0usize);
    for word in lower.split(|c: char| !(c.is_alphabetic() || c == '\'')).filter(|w| !w.is_empty()) {
        for c in word.chars().filter(|c| c.is_alphabetic()) {
            letters.0 += usize::from(c.is_ascii_alphabetic());
            letters.1 += 1;
        }
        for (slot, (_, words)) in tally.iter_mut().zip(STOPWORDS) {
            *slot += usize::from(words.contains(&word));
        }
    }
    let english = tally[0];
    let other = tally[1..].iter().copied().max().unwrap_or(0);
    if english + other > 0 {
        english as f64 / (english + other) as f64
    } else if letters.1 > 0 && letters.0 == letters.1 {
        0.5
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelevanceConfig {
    /// Minimum normalized length in characters.
    pub min_chars: usize,
    pub require_english: bool,
    /// Minimum [`english_score`] for a review to count as English.
    pub english_threshold: f64,
    pub reject_duplicates: bool,
}

impl Default for RelevanceConfig {
    fn default() -> Self {
        Self { min_chars: 10, require_english: true, english_threshold: 0.5, reject_duplicates: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rejection {
    Empty,
    TooShort,
    NotEnglish,
    Duplicate,
    UnknownTrail,
}

impl RelevanceConfig {
    /// First failing rule for a normalized review, checked in a fixed order.
    /// `existing` is what the trail already holds.
    pub fn check(&self, text: &str, existing: &[Review]) -> Result<(), Rejection> {
        if text.is_empty() {
            return Err(Rejection::Empty);
        }
        if text.chars().count() < self.min_chars {
            return Err(Rejection::TooShort);
        }
        if self.require_english && english_score(text) < self.english_threshold {
            return Err(Rejection::NotEnglish);
        }
        if self.reject_duplicates && existing.iter().any(|r| r.text == text) {
            return Err(Rejection::Duplicate);
        }
        Ok(())
    }
}

/// Whether an already-normalized review passes every configured rule for
/// `trail`, given the reviews the trail already has.
pub fn is_relevant(review: &RawReview, trail: &TrailRecord, existing: &[Review], config: &RelevanceConfig) -> bool {
    let same_trail: Vec<Review> = existing.iter().filter(|r| r.trail_id == trail.id).cloned().collect();
    config.check(&review.text, &same_trail).is_ok()
}
