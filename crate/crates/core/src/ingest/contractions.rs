use std::sync::OnceLock;

use thiserror::Error;

const BUNDLED: &str = include_str!("../../data/contractions.tsv");

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("line {line}: expected `contraction<TAB>expansion`")]
    Malformed { line: usize },
    #[error("line {line}: contraction {contraction:?} must be ASCII with an apostrophe")]
    BadContraction { line: usize, contraction: String },
    #[error("line {line}: expansion {expansion:?} must be non-empty and apostrophe-free")]
    BadExpansion { line: usize, expansion: String },
    #[error("{earlier:?} is listed before the longer {later:?} it starts")]
    Shadowed { earlier: String, later: String },
    #[error("duplicate contraction {0:?}")]
    Duplicate(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contraction {
    pub contraction: String,
    pub expansion: String,
}

/// Ordered contraction -> expansion pairs.
///
/// Validated so expansion terminates: expansions carry no apostrophe (every
/// rewrite removes one), and no entry is preceded by a shorter entry that
/// it begins with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContractionTable {
    entries: Vec<Contraction>,
}

impl ContractionTable {
    /// The table shipped in `data/contractions.tsv`.
    pub fn bundled() -> &'static ContractionTable {
        static TABLE: OnceLock<ContractionTable> = OnceLock::new();
        TABLE.get_or_init(|| Self::parse(BUNDLED).expect("bundled contraction table is valid"))
    }

    /// Parse the TSV format: `#` comments, blank lines ignored.
    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (c, e) = trimmed.split_once('\t').ok_or(TableError::Malformed { line })?;
            let (c, e) = (c.trim(), e.trim());
            if !c.is_ascii() || !c.contains('\'') || c.starts_with('\'') || c.ends_with('\'') {
                return Err(TableError::BadContraction { line, contraction: c.into() });
            }
            if e.is_empty() || e.contains('\'') || e.contains('\u{2019}') {
                return Err(TableError::BadExpansion { line, expansion: e.into() });
            }
            pairs.push((c.to_string(), e.to_string()));
        }
        Self::new(pairs)
    }

    pub fn new(pairs: Vec<(String, String)>) -> Result<Self, TableError> {
        let entries: Vec<Contraction> =
            pairs.into_iter().map(|(contraction, expansion)| Contraction { contraction, expansion }).collect();
        for (i, a) in entries.iter().enumerate() {
            for b in &entries[i + 1..] {
                let (al, bl) = (a.contraction.to_ascii_lowercase(), b.contraction.to_ascii_lowercase());
                if al == bl {
                    return Err(TableError::Duplicate(a.contraction.clone()));
                }
                if bl.starts_with(&al) {
                    return Err(TableError::Shadowed { earlier: a.contraction.clone(), later: b.contraction.clone() });
                }
            }
        }
        let table = Self { entries };
        for e in &table.entries {
            if e.expansion.is_empty() || e.expansion.contains('\'') {
                return Err(TableError::BadExpansion { line: 0, expansion: e.expansion.clone() });
            }
        }
        Ok(table)
    }

    pub fn entries(&self) -> &[Contraction] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Longest entry matching case-insensitively at byte offset `at`, with
    /// no alphanumeric character immediately after it.
    pub(crate) fn match_at(&self, text: &str, at: usize) -> Option<&Contraction> {
        let rest = &text.as_bytes()[at..];
        self.entries
            .iter()
            .filter(|e| {
                let c = e.contraction.as_bytes();
                rest.len() >= c.len()
                    && rest[..c.len()].eq_ignore_ascii_case(c)
                    && !text[at + c.len()..].chars().next().is_some_and(char::is_alphanumeric)
            })
            .max_by_key(|e| e.contraction.len())
    }

    /// Byte offset of the first contraction at a word boundary, if any.
    pub fn find_contraction(&self, text: &str) -> Option<usize> {
        let mut prev: Option<char> = None;
        for (i, c) in text.char_indices() {
            if !prev.is_some_and(char::is_alphanumeric) && self.match_at(text, i).is_some() {
                return Some(i);
            }
            prev = Some(c);
        }
        None
    }
}
