use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{normalize_review_text, ContractionTable, RawReview, Rejection, RelevanceConfig};
use crate::store::{NewReview, StoreError, TrailId, TrailRecord, TrailStore};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file} line {line}: {message}")]
    Malformed { file: String, line: usize, message: String },
    #[error("{file} line {line}: duplicate trail name {name:?} (first seen on line {first_line})")]
    DuplicateTrail { file: String, line: usize, first_line: usize, name: String },
    #[error("{file} line {line}: {source}")]
    InvalidTrail {
        file: String,
        line: usize,
        #[source]
        source: StoreError,
    },
    #[error("store: {0}")]
    Store(#[from] StoreError),
}

/// Parse JSON-lines records, skipping blank lines. Errors name the 1-based
/// line number.
pub fn parse_jsonl<T: DeserializeOwned>(reader: impl Read, file: &str) -> Result<Vec<(usize, T)>, IngestError> {
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => {
                IngestError::Malformed { file: file.into(), line: line_no, message: "not valid UTF-8".into() }
            }
            _ => IngestError::Io { file: file.into(), source: e },
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value = serde_json::from_str(trimmed).map_err(|e| IngestError::Malformed {
            file: file.into(),
            line: line_no,
            message: e.to_string(),
        })?;
        out.push((line_no, value));
    }
    Ok(out)
}

/// Parse and validate a trails file; names must be unique case-insensitively.
pub fn parse_trails(reader: impl Read, file: &str) -> Result<Vec<(usize, TrailRecord)>, IngestError> {
    let rows: Vec<(usize, TrailRecord)> = parse_jsonl(reader, file)?;
    let mut seen: std::collections::HashMap<String, usize> = Default::default();
    for (line, trail) in &rows {
        trail.validate().map_err(|source| IngestError::InvalidTrail { file: file.into(), line: *line, source })?;
        if let Some(&first_line) = seen.get(&trail.name.to_lowercase()) {
            return Err(IngestError::DuplicateTrail {
                file: file.into(),
                line: *line,
                first_line,
                name: trail.name.clone(),
            });
        }
        seen.insert(trail.name.to_lowercase(), *line);
    }
    Ok(rows)
}

pub fn parse_reviews(reader: impl Read, file: &str) -> Result<Vec<(usize, RawReview)>, IngestError> {
    parse_jsonl(reader, file)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilteredReview {
    pub line: usize,
    pub trail_name_hint: String,
    pub reason: Rejection,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub trails_loaded: usize,
    pub reviews_loaded: usize,
    pub reviews_filtered: usize,
    pub filtered: Vec<FilteredReview>,
    /// Trails whose row or review set changed.
    pub affected_trails: Vec<TrailId>,
}

fn squash(name: &str) -> String {
    let lower = name.to_lowercase();
    let words: Vec<&str> = lower.split_whitespace().collect();
    let words = match words.split_last() {
        Some((&"trail", rest)) if !rest.is_empty() => rest,
        _ => &words[..],
    };
    words.join(" ")
}

/// Map a review's trail hint to exactly one stored trail: case-insensitive
/// name first, then the name with whitespace squashed and a trailing
/// "trail" dropped.
pub fn resolve_hint(hint: &str, store: &TrailStore) -> Option<TrailRecord> {
    if let Some(t) = store.get_trail_by_name(hint.trim()) {
        return Some(t);
    }
    let want = squash(hint);
    let mut found = store.trails().into_iter().filter(|t| squash(&t.name) == want);
    match (found.next(), found.next()) {
        (Some(t), None) => Some(t),
        _ => None,
    }
}

pub struct CorpusSource<'a, R1: Read, R2: Read> {
    pub trails: R1,
    pub trails_name: &'a str,
    pub reviews: R2,
    pub reviews_name: &'a str,
}

/// Import from open readers. Both inputs are parsed completely before
/// anything is written, so a malformed file changes nothing.
pub fn import_from_readers<R1: Read, R2: Read>(
    src: CorpusSource<'_, R1, R2>,
    store: &TrailStore,
    table: &ContractionTable,
    config: &RelevanceConfig,
) -> Result<IngestReport, IngestError> {
    let trails = parse_trails(src.trails, src.trails_name)?;
    let reviews = parse_reviews(src.reviews, src.reviews_name)?;

    let _guard = store.import_guard();
    let mut report = IngestReport::default();
    let mut affected = HashSet::new();
    for (_, trail) in trails {
        let id = store.upsert_trail(trail)?;
        affected.insert(id);
        report.trails_loaded += 1;
    }
    for (line, raw) in reviews {
        let reject = |reason| FilteredReview { line, trail_name_hint: raw.trail_name_hint.clone(), reason };
        let Some(trail) = resolve_hint(&raw.trail_name_hint, store) else {
            report.filtered.push(reject(Rejection::UnknownTrail));
            continue;
        };
        let text = normalize_review_text(&raw.text, table);
        let existing = store.reviews_for_trail(trail.id)?;
        if let Err(reason) = config.check(&text, &existing) {
            report.filtered.push(reject(reason));
            continue;
        }
        store.insert_review(NewReview { trail_id: trail.id, source: raw.source, text, fetched_at: raw.fetched_at })?;
        affected.insert(trail.id);
        report.reviews_loaded += 1;
    }
    report.reviews_filtered = report.filtered.len();
    report.affected_trails = affected.into_iter().collect();
    report.affected_trails.sort();
    Ok(report)
}

/// Load a trails file and a reviews file (both JSON-lines) into `store`.
pub fn import_corpus(
    trails_file: &Path,
    reviews_file: &Path,
    store: &TrailStore,
    config: &RelevanceConfig,
) -> Result<IngestReport, IngestError> {
    let open =
        |p: &Path| std::fs::File::open(p).map_err(|source| IngestError::Io { file: p.display().to_string(), source });
    let (tn, rn) = (trails_file.display().to_string(), reviews_file.display().to_string());
    import_from_readers(
        CorpusSource { trails: open(trails_file)?, trails_name: &tn, reviews: open(reviews_file)?, reviews_name: &rn },
        store,
        ContractionTable::bundled(),
        config,
    )
}
