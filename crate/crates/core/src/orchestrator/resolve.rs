use serde::{Deserialize, Serialize};

use crate::store::TrailRecord;

/// Largest normalized edit distance at which a name is offered as a
/// candidate.
pub const FUZZY_THRESHOLD: f64 = 0.34;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub name: String,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TrailMention {
    Found(TrailRecord),
    /// No exact mention; closest names first, possibly empty.
    Candidates(Vec<Candidate>),
}

fn words(text: &str) -> Vec<String> {
    text.to_lowercase()
        .replace('\u{2019}', "'")
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

/// Name words without a trailing "trail".
fn core_words(name: &str) -> Vec<String> {
    let mut w = words(name);
    if w.len() > 1 && w.last().is_some_and(|l| l == "trail") {
        w.pop();
    }
    w
}

fn contains_run(hay: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle)
}

/// Find the trail a query talks about.
///
/// A name (or the name without a trailing "trail") appearing as a run of
/// whole words wins, longest name first, then by name. Otherwise every trail
/// whose core name is within [`FUZZY_THRESHOLD`] of some same-length word
/// window of the query is a candidate, closest first, ties by name.
pub fn resolve_trail_mention(query: &str, trails: &[TrailRecord]) -> TrailMention {
    let q = words(query);
    let mut exact: Vec<&TrailRecord> =
        trails.iter().filter(|t| contains_run(&q, &words(&t.name)) || contains_run(&q, &core_words(&t.name))).collect();
    exact.sort_by(|a, b| b.name.chars().count().cmp(&a.name.chars().count()).then_with(|| a.name.cmp(&b.name)));
    if let Some(t) = exact.first() {
        return TrailMention::Found((*t).clone());
    }

    let mut found: Vec<Candidate> = trails
        .iter()
        .filter_map(|t| {
            let core = core_words(&t.name);
            if core.is_empty() || q.len() < core.len() {
                return None;
            }
            let target = core.join(" ");
            let best = q
                .windows(core.len())
                .map(|w| 1.0 - strsim::normalized_levenshtein(&w.join(" "), &target))
                .fold(f64::INFINITY, f64::min);
            (best <= FUZZY_THRESHOLD).then(|| Candidate { name: t.name.clone(), distance: best })
        })
        .collect();
    found.sort_by(|a, b| a.distance.total_cmp(&b.distance).then_with(|| a.name.cmp(&b.name)));
    TrailMention::Candidates(found)
}
