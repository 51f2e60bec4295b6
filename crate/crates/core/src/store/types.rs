use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::StoreError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrailId(pub u64);

impl fmt::Display for TrailId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReviewId(pub u64);

impl fmt::Display for ReviewId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Parse error for the closed enums below; carries the rejected text.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {kind} value {value:?}")]
pub struct UnknownVariant {
    pub kind: &'static str,
    pub value: String,
}

macro_rules! closed_enum {
    ($(#[$m:meta])* $name:ident, $kind:literal { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(rename_all = "lowercase")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = UnknownVariant;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                $(if s.eq_ignore_ascii_case($text) {
                    return Ok($name::$variant);
                })+
                Err(UnknownVariant { kind: $kind, value: s.to_string() })
            }
        }
    };
}

closed_enum!(
    /// Ordered easiest first, so `<` / `>` in filters compare by effort.
    Difficulty, "difficulty" {
        Easy => "easy",
        Moderate => "moderate",
        Difficult => "difficult",
    }
);

closed_enum!(Activity, "activity" {
    Hiking => "hiking",
    Biking => "biking",
    Walking => "walking",
    Horseback => "horseback",
    Snowshoeing => "snowshoeing",
});

closed_enum!(TriState, "yes/no/unknown" {
    Yes => "yes",
    No => "no",
    Unknown => "unknown",
});

closed_enum!(ReviewSource, "review source" {
    Google => "google",
    Traillink => "traillink",
    Other => "other",
});

impl Default for TriState {
    fn default() -> Self {
        TriState::Unknown
    }
}

/// Structured attributes of one trail.
///
/// `id` is assigned by the store; any value present in an input file is
/// ignored on upsert.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrailRecord {
    #[serde(default)]
    pub id: TrailId,
    pub name: String,
    pub town: String,
    pub length_miles: f64,
    pub difficulty: Difficulty,
    pub activities: BTreeSet<Activity>,
    #[serde(default)]
    pub pets_allowed: TriState,
    #[serde(default)]
    pub wheelchair_accessible: TriState,
    #[serde(default)]
    pub description: String,
}

impl TrailRecord {
    pub fn validate(&self) -> Result<(), StoreError> {
        if self.name.trim().is_empty() {
            return Err(StoreError::Validation("trail name is empty".into()));
        }
        if !(self.length_miles.is_finite() && self.length_miles > 0.0) {
            return Err(StoreError::Validation(format!(
                "trail {:?}: length_miles must be a positive number, got {}",
                self.name, self.length_miles
            )));
        }
        if self.activities.is_empty() {
            return Err(StoreError::Validation(format!("trail {:?}: activities must not be empty", self.name)));
        }
        Ok(())
    }
}

/// A stored review. `text` is always normalization-stable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Review {
    pub id: ReviewId,
    pub trail_id: TrailId,
    pub source: ReviewSource,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fetched_at: Option<DateTime<Utc>>,
}

/// Insert payload for a review; the store assigns the id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewReview {
    pub trail_id: TrailId,
    pub source: ReviewSource,
    pub text: String,
    pub fetched_at: Option<DateTime<Utc>>,
}
