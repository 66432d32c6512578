//! Grounding generated entity strings back to character spans.
//!
//! Scoring a generative model against span gold needs offsets, but models
//! emit strings. Grounding maps a string to *every* occurrence in the
//! note — surveillance narratives repeat symptoms and gold annotates each
//! mention — selecting occurrences greedily left to right without
//! overlap. A string that never occurs is a hallucination; it grounds to
//! nothing and is counted.

use crate::corpus::{EntitySpan, EntityType};

/// Counters maintained across grounding calls.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GroundStats {
    /// Entity strings with no occurrence in the note.
    pub ungrounded: usize,
    /// Spans produced by grounding.
    pub grounded_spans: usize,
}

/// Lowercases one character, keeping a 1:1 position mapping (multi-char
/// expansions take their first character).
fn fold(c: char) -> char {
    c.to_lowercase().next().unwrap_or(c)
}

/// Finds all case-insensitive occurrences of `entity` in `text`, greedily
/// left to right and non-overlapping, as spans of type `etype` whose
/// surfaces keep the document's original casing. Increments
/// `stats.ungrounded` when there is no occurrence.
pub fn ground(
    text: &str,
    entity: &str,
    etype: EntityType,
    stats: &mut GroundStats,
) -> Vec<EntitySpan> {
    let needle: Vec<char> = entity.trim().chars().map(fold).collect();
    if needle.is_empty() {
        return Vec::new();
    }
    let haystack: Vec<char> = text.chars().map(fold).collect();

    let mut spans = Vec::new();
    let mut i = 0;
    while i + needle.len() <= haystack.len() {
        if haystack[i..i + needle.len()] == needle[..] {
            if let Some(span) = EntitySpan::from_text(text, i, i + needle.len(), etype) {
                spans.push(span);
            }
            i += needle.len();
        } else {
            i += 1;
        }
    }

    if spans.is_empty() {
        stats.ungrounded += 1;
    } else {
        stats.grounded_spans += spans.len();
    }
    spans
}
