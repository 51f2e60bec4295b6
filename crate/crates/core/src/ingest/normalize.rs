//! Review text cleanup.
//!
//! Three passes, always in this order:
//!
//! 1. drop pictographs, emoji joiners and selectors, asterisks and control
//!    characters; fold the typographic apostrophe `’` to `'`;
//! 2. collapse each whitespace run to one `\n` if it contains a line break,
//!    otherwise to one space, and trim both ends;
//! 3. expand contractions until none is left at a word boundary.
//!
//! Pass 3 never produces characters pass 1 removes or whitespace runs pass 2
//! collapses, so the result is a fixed point of the whole pipeline.

use super::ContractionTable;

/// Closed set of pictograph code point ranges removed from reviews.
pub const EMOJI_RANGES: &[(u32, u32)] = &[
    (0x2600, 0x26FF),   // Miscellaneous Symbols
    (0x2700, 0x27BF),   // Dingbats
    (0x1F1E6, 0x1F1FF), // Regional indicators (flags)
    (0x1F300, 0x1F5FF), // Miscellaneous Symbols and Pictographs
    (0x1F600, 0x1F64F), // Emoticons
    (0x1F680, 0x1F6FF), // Transport and Map Symbols
    (0x1F900, 0x1F9FF), // Supplemental Symbols and Pictographs
    (0x1FA70, 0x1FAFF), // Symbols and Pictographs Extended-A
];

/// Joiners, selectors and tags that only exist to build emoji sequences.
pub const EMOJI_COMPONENTS: &[(u32, u32)] = &[
    (0x200D, 0x200D),   // zero width joiner
    (0x20E3, 0x20E3),   // combining enclosing keycap
    (0xFE00, 0xFE0F),   // variation selectors
    (0xE0020, 0xE007F), // tag characters
    (0xE0100, 0xE01EF), // variation selectors supplement
];

fn in_ranges(c: char, ranges: &[(u32, u32)]) -> bool {
    let cp = c as u32;
    ranges.iter().any(|&(lo, hi)| (lo..=hi).contains(&cp))
}

pub fn is_emoji(c: char) -> bool {
    in_ranges(c, EMOJI_RANGES) || in_ranges(c, EMOJI_COMPONENTS)
}

/// Characters pass 1 deletes outright.
pub fn is_forbidden(c: char) -> bool {
    c == '*' || is_emoji(c) || (c.is_control() && !c.is_whitespace())
}

fn is_line_break(c: char) -> bool {
    matches!(c, '\n' | '\r' | '\u{0B}' | '\u{0C}' | '\u{85}' | '\u{2028}' | '\u{2029}')
}

fn strip_forbidden(raw: &str) -> String {
    raw.chars().filter(|&c| !is_forbidden(c)).map(|c| if c == '\u{2019}' { '\'' } else { c }).collect()
}

fn collapse_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending: Option<char> = None;
    for c in text.chars() {
        if c.is_whitespace() {
            let sep = if is_line_break(c) { '\n' } else { ' ' };
            pending = match pending {
                Some('\n') => Some('\n'),
                _ => Some(sep),
            };
        } else {
            if let Some(sep) = pending.take() {
                if !out.is_empty() {
                    out.push(sep);
                }
            }
            out.push(c);
        }
    }
    out
}

fn expand_pass(text: &str, table: &ContractionTable) -> Option<String> {
    let mut out = String::with_capacity(text.len() + 16);
    let mut changed = false;
    let mut prev: Option<char> = None;
    let mut i = 0;
    while i < text.len() {
        let c = text[i..].chars().next().expect("in bounds");
        if !prev.is_some_and(char::is_alphanumeric) {
            if let Some(entry) = table.match_at(text, i) {
                let mut exp = entry.expansion.chars();
                let first = exp.next().expect("expansions are non-empty");
                if c.is_uppercase() {
                    out.extend(first.to_uppercase());
                } else {
                    out.push(first);
                }
                out.push_str(exp.as_str());
                i += entry.contraction.len();
                prev = entry.expansion.chars().last();
                changed = true;
                continue;
            }
        }
        out.push(c);
        prev = Some(c);
        i += c.len_utf8();
    }
    changed.then_some(out)
}

/// Expand every contraction at a word boundary, repeating until stable.
pub fn expand_contractions(text: &str, table: &ContractionTable) -> String {
    let mut current = text.to_string();
    // Each rewrite removes an apostrophe, so this terminates.
    while let Some(next) = expand_pass(&current, table) {
        current = next;
    }
    current
}

/// Clean one review. Idempotent; may return an empty string.
pub fn normalize_review_text(raw: &str, table: &ContractionTable) -> String {
    let stripped = strip_forbidden(raw);
    let collapsed = collapse_whitespace(&stripped);
    expand_contractions(&collapsed, table)
}
