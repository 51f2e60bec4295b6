//! Decide which answer path a question takes.
//!
//! Without a model the decision is a fixed rule cascade over word-boundary
//! phrase matches:
//!
//! 1. opinion or experience wording ("people say", "crowded", ...) goes to
//!    the review path;
//! 2. an ask for a recommendation ("recommend", "suggest", ...) goes to the
//!    recommendation path;
//! 3. words naming a trail attribute go to the structured path;
//! 4. anything else is out of scope.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::llm::{LlmGateway, PromptBundle, Provenance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteKind {
    Recommendation,
    Structured,
    ReviewRag,
    OutOfScope,
}

impl RouteKind {
    pub const ALL: [RouteKind; 4] =
        [RouteKind::Recommendation, RouteKind::Structured, RouteKind::ReviewRag, RouteKind::OutOfScope];

    pub fn as_str(self) -> &'static str {
        match self {
            RouteKind::Recommendation => "recommendation",
            RouteKind::Structured => "structured",
            RouteKind::ReviewRag => "review_rag",
            RouteKind::OutOfScope => "out_of_scope",
        }
    }
}

impl fmt::Display for RouteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryRoute {
    pub kind: RouteKind,
    pub confidence: f64,
    pub rationale: String,
}

pub const RULE_CONFIDENCE: f64 = 0.8;
pub const MODEL_CONFIDENCE: f64 = 0.9;
pub const OUT_OF_SCOPE_CONFIDENCE: f64 = 0.25;
/// Multiplier applied when a model was asked but its answer was unusable.
pub const FALLBACK_PENALTY: f64 = 0.5;

const OPINION: &[&str] = &[
    "review",
    "reviews",
    "reviewer",
    "reviewers",
    "people say",
    "people think",
    "folks say",
    "visitors",
    "visitor",
    "hikers say",
    "crowded",
    "crowds",
    "busy",
    "scenery",
    "scenic",
    "wildlife",
    "animals",
    "encounter",
    "encountered",
    "experience",
    "experiences",
    "opinion",
    "opinions",
    "worth it",
    "worth the",
    "how was",
    "what is it like",
    "what's it like",
    "like to hike",
    "muddy",
    "bugs",
    "ticks",
    "views",
    "impressions",
    "complain",
    "complaints",
    "recommend it",
];

const RECOMMEND: &[&str] = &[
    "recommend",
    "recommendation",
    "recommendations",
    "suggest",
    "suggestion",
    "suggestions",
    "which trail should",
    "what trail should",
    "where should i",
    "looking for a trail",
    "find me",
    "help me find",
    "best trail",
    "good trail for",
    "a trail for",
    "trails for",
];

/// Attribute words beyond the field names themselves.
const SCHEMA_SYNONYMS: &[&str] = &[
    "long",
    "length",
    "miles",
    "mile",
    "distance",
    "far",
    "short",
    "difficulty",
    "difficult",
    "hard",
    "easy",
    "moderate",
    "strenuous",
    "pets",
    "pet",
    "dog",
    "dogs",
    "leash",
    "wheelchair",
    "accessible",
    "accessibility",
    "stroller",
    "activities",
    "activity",
    "bike",
    "biking",
    "bikes",
    "horse",
    "horseback",
    "snowshoe",
    "snowshoeing",
    "walking",
    "hiking",
    "town",
    "located",
    "location",
    "where is",
    "which town",
    "allowed",
    "permitted",
    "list",
    "trails in",
    "how many trails",
];

/// Lowercased words joined by single spaces and padded, so phrase lookups
/// match whole words only.
fn padded_words(query: &str) -> String {
    let lower = query.to_lowercase().replace('\u{2019}', "'");
    let words: Vec<&str> =
        lower.split(|c: char| !(c.is_alphanumeric() || c == '\'')).filter(|w| !w.is_empty()).collect();
    format!(" {} ", words.join(" "))
}

fn first_hit<'a>(text: &str, lexicon: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    lexicon.into_iter().find(|term| text.contains(&format!(" {term} ")))
}

/// Deterministic rule cascade; see the module docs.
pub fn fallback_rules(query: &str, schema_fields: &[&str]) -> QueryRoute {
    let text = padded_words(query);
    if text.trim().is_empty() {
        return QueryRoute {
            kind: RouteKind::OutOfScope,
            confidence: OUT_OF_SCOPE_CONFIDENCE,
            rationale: "empty query".into(),
        };
    }
    let hit = |kind, term: &str, what: &str| QueryRoute {
        kind,
        confidence: RULE_CONFIDENCE,
        rationale: format!("{what} term {term:?}"),
    };
    if let Some(t) = first_hit(&text, OPINION.iter().copied()) {
        return hit(RouteKind::ReviewRag, t, "opinion");
    }
    if let Some(t) = first_hit(&text, RECOMMEND.iter().copied()) {
        return hit(RouteKind::Recommendation, t, "recommendation");
    }
    let field_words: Vec<String> = schema_fields
        .iter()
        .flat_map(|f| std::iter::once(f.replace('_', " ")).chain(f.split('_').map(str::to_string)))
        .filter(|w| w.len() > 2)
        .collect();
    let schema = field_words.iter().map(String::as_str).chain(SCHEMA_SYNONYMS.iter().copied());
    if let Some(t) = first_hit(&text, schema) {
        return hit(RouteKind::Structured, t, "attribute");
    }
    QueryRoute { kind: RouteKind::OutOfScope, confidence: OUT_OF_SCOPE_CONFIDENCE, rationale: "no rule matched".into() }
}

const ROUTE_SYSTEM: &str = "Classify the user's question about hiking trails. \
Answer with exactly one word: RECOMMENDATION if they want trail suggestions, \
STRUCTURED if it can be answered from these trail attributes, \
REVIEWS if it needs visitor opinions or experiences.";

/// Parse a forced-choice label. Case and surrounding whitespace or a
/// trailing period are tolerated; anything else is rejected.
pub fn parse_route_label(text: &str) -> Option<RouteKind> {
    let t = text.trim().trim_end_matches('.').trim();
    [
        ("RECOMMENDATION", RouteKind::Recommendation),
        ("STRUCTURED", RouteKind::Structured),
        ("REVIEWS", RouteKind::ReviewRag),
    ]
    .into_iter()
    .find(|(label, _)| t.eq_ignore_ascii_case(label))
    .map(|(_, k)| k)
}

/// Route a question, asking the model when one is given and falling back to
/// the rules (at reduced confidence) when its answer is unusable.
pub fn classify(query: &str, schema_fields: &[&str], llm: Option<&LlmGateway>) -> QueryRoute {
    let Some(llm) = llm else {
        return fallback_rules(query, schema_fields);
    };
    if query.trim().is_empty() {
        return fallback_rules(query, schema_fields);
    }
    let bundle = PromptBundle {
        system: ROUTE_SYSTEM.into(),
        context: format!("Trail attributes: {}", schema_fields.join(", ")),
        question: query.into(),
        history: vec![],
        provenance: Provenance::None,
    };
    let reply = llm.complete(&bundle);
    if let Some(kind) = reply.as_deref().ok().and_then(parse_route_label) {
        return QueryRoute { kind, confidence: MODEL_CONFIDENCE, rationale: "model label".into() };
    }
    let mut route = fallback_rules(query, schema_fields);
    route.confidence *= FALLBACK_PENALTY;
    route.rationale = match reply {
        Ok(_) => format!("unparseable model label; {}", route.rationale),
        Err(e) => format!("model failed ({e}); {}", route.rationale),
    };
    route
}

/// One labeled routing example.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutingCase {
    pub query: String,
    pub expected_kind: RouteKind,
}
