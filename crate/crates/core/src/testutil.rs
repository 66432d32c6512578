//! Shared fixtures for the crate's unit tests.

use crate::{AnnotatedDocument, EntitySpan, EntityType, Source};

/// The running example used across the crate's tests: a first-person
/// vaccination note with one vaccine mention and two adverse events.
pub const NOTE: &str = "My first shot of moderna vaccine = very sore arm the next day \
and very tired so I slept a lot .";

/// Locates `needle` in `text` by substring search and returns its
/// character interval. Panics when absent or when `text` is not ASCII
/// (byte offsets equal character offsets only for ASCII).
pub fn find_span(text: &str, needle: &str) -> (usize, usize) {
    assert!(text.is_ascii(), "find_span assumes ASCII fixtures");
    let start = text.find(needle).expect("fixture substring present");
    (start, start + needle.len())
}

/// Builds the note fixture document: spans for "moderna vaccine"
/// (vaccine), "sore arm" (ae), and "tired" (ae).
pub fn note_doc() -> AnnotatedDocument {
    let spans = vec![
        span(NOTE, "moderna vaccine", EntityType::Vaccine),
        span(NOTE, "sore arm", EntityType::AdverseEvent),
        span(NOTE, "tired", EntityType::AdverseEvent),
    ];
    AnnotatedDocument::new("twitter:fixture-1", Source::Twitter, NOTE, spans)
}

/// A span over the first occurrence of `needle` in `text`.
pub fn span(text: &str, needle: &str, etype: EntityType) -> EntitySpan {
    let (start, end) = find_span(text, needle);
    EntitySpan::new(start, end, etype, needle)
}
