//! Turn a free-text question into a filter expression without a model.
//!
//! The output is filter-language text that still goes through
//! [`parse_filter`], so the rules cannot produce anything the parser would
//! reject from a model.

use crate::store::dsl::{parse_filter, quote, FilterExpr, ParseError};
use crate::store::TrailRecord;

use super::resolve::{resolve_trail_mention, TrailMention};

fn words(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !(c.is_alphanumeric() || c == '.'))
        .map(|w| w.trim_matches('.').to_string())
        .filter(|w| !w.is_empty())
        .collect()
}

fn any(ws: &[String], set: &[&str]) -> bool {
    ws.iter().any(|w| set.contains(&w.as_str()))
}

/// Length bound following a comparative phrase, e.g. "under 3 miles".
fn length_bound(ws: &[String]) -> Option<String> {
    const LESS: &[&str] = &["under", "below", "shorter", "less", "within", "max", "maximum"];
    const MORE: &[&str] = &["over", "above", "longer", "more", "least", "min", "minimum"];
    for (i, w) in ws.iter().enumerate() {
        let op = if LESS.contains(&w.as_str()) {
            "<="
        } else if MORE.contains(&w.as_str()) {
            ">="
        } else {
            continue;
        };
        // the number may follow a filler word ("less than 3", "at least 5")
        let num = ws[i + 1..].iter().take(2).find_map(|n| n.parse::<f64>().ok().filter(|v| v.is_finite() && *v >= 0.0));
        if let Some(n) = num {
            return Some(format!("length_miles {op} {n}"));
        }
    }
    None
}

/// Filter text for the attribute constraints a question mentions. A named
/// trail short-circuits to a name match; no constraints means match-all
/// (the empty string).
pub fn constraint_filter_text(query: &str, trails: &[TrailRecord], allow_name: bool) -> String {
    if allow_name {
        if let TrailMention::Found(t) = resolve_trail_mention(query, trails) {
            return format!("name = {}", quote(&t.name));
        }
    }
    let ws = words(query);
    let mut terms: Vec<String> = Vec::new();
    if any(&ws, &["easy", "easiest", "beginner", "beginners", "gentle"]) {
        terms.push("difficulty = \"easy\"".into());
    } else if any(&ws, &["moderate", "intermediate"]) {
        terms.push("difficulty = \"moderate\"".into());
    } else if any(&ws, &["difficult", "hard", "hardest", "challenging", "strenuous", "tough"]) {
        terms.push("difficulty = \"difficult\"".into());
    }
    if any(&ws, &["dog", "dogs", "pet", "pets", "puppy"]) {
        terms.push("pets_allowed = \"yes\"".into());
    }
    if any(&ws, &["wheelchair", "accessible", "accessibility", "stroller", "strollers"]) {
        terms.push("wheelchair_accessible = \"yes\"".into());
    }
    for (keys, activity) in [
        (&["bike", "biking", "bikes", "cycling", "cyclist", "cyclists"][..], "biking"),
        (&["horse", "horses", "horseback", "riding"][..], "horseback"),
        (&["snowshoe", "snowshoeing", "snowshoes"][..], "snowshoeing"),
    ] {
        if any(&ws, keys) {
            terms.push(format!("activities HAS \"{activity}\""));
        }
    }
    if let Some(bound) = length_bound(&ws) {
        terms.push(bound);
    } else if any(&ws, &["short", "shorter", "quick"]) {
        terms.push("length_miles <= 3".into());
    }
    let mut towns: Vec<&str> = trails.iter().map(|t| t.town.as_str()).collect();
    towns.sort_unstable();
    towns.dedup();
    let lower = format!(" {} ", ws.join(" "));
    if let Some(town) =
        towns.iter().filter(|t| lower.contains(&format!(" {} ", words(t).join(" ")))).max_by_key(|t| t.len())
    {
        terms.push(format!("town = {}", quote(town)));
    }
    let mut text = terms.join(" AND ");
    if any(&ws, &["shortest"]) {
        text.push_str(" ORDER BY length_miles ASC");
    } else if any(&ws, &["longest"]) {
        text.push_str(" ORDER BY length_miles DESC");
    }
    text.trim().to_string()
}

pub fn constraint_filter(query: &str, trails: &[TrailRecord], allow_name: bool) -> Result<FilterExpr, ParseError> {
    parse_filter(&constraint_filter_text(query, trails, allow_name))
}
