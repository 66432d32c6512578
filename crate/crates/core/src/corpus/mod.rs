//! Documents, typed character spans, and corpus-level operations.
//!
//! All character offsets throughout the crate count Unicode scalar values,
//! 0-based, end-exclusive. Byte offsets are never exposed: they depend on
//! the encoding and do not survive round trips through external tools.

mod format;
mod social;
mod split;
mod stats;
mod vaers;

pub use format::{corpus_to_string, load_corpus, load_corpus_reader, write_corpus};
pub use social::{filter_social, load_social_records, FilterOutcome, FilterRules, SocialRecord};
pub use split::{split_corpus, SplitSpec, DEFAULT_SPLIT_SEED};
pub use stats::{entity_stats, render_stats, CorpusStats, TypeCounts};
pub use vaers::{ingest_vaers, VaersIngestion};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The closed set of entity labels.
///
/// Parsing accepts exactly the three canonical labels. The generation
/// parser in [`crate::llm`] additionally maps the label "dose" to
/// [`EntityType::Shot`]; nothing else does.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityType {
    #[serde(rename = "vaccine")]
    Vaccine,
    #[serde(rename = "shot")]
    Shot,
    #[serde(rename = "ae")]
    AdverseEvent,
}

impl EntityType {
    pub const ALL: [EntityType; 3] = [
        EntityType::Vaccine,
        EntityType::Shot,
        EntityType::AdverseEvent,
    ];

    pub fn label(self) -> &'static str {
        match self {
            EntityType::Vaccine => "vaccine",
            EntityType::Shot => "shot",
            EntityType::AdverseEvent => "ae",
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for EntityType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vaccine" => Ok(EntityType::Vaccine),
            "shot" => Ok(EntityType::Shot),
            "ae" => Ok(EntityType::AdverseEvent),
            other => Err(Error::Invalid(format!(
                "unknown entity type {other:?} (expected vaccine, shot, or ae)"
            ))),
        }
    }
}

/// Where a document came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Vaers,
    Twitter,
    Reddit,
    Synthetic,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Source::Vaers => "vaers",
            Source::Twitter => "twitter",
            Source::Reddit => "reddit",
            Source::Synthetic => "synthetic",
        };
        f.write_str(s)
    }
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vaers" => Ok(Source::Vaers),
            "twitter" => Ok(Source::Twitter),
            "reddit" => Ok(Source::Reddit),
            "synthetic" => Ok(Source::Synthetic),
            other => Err(Error::Invalid(format!("unknown source {other:?}"))),
        }
    }
}

/// A typed character interval over a document.
///
/// Invariants (enforced by [`AnnotatedDocument::validate`]):
/// - `0 <= start < end <=` character length of the document text
/// - `surface` equals the document text slice `[start, end)`
/// - `surface` has no leading or trailing whitespace
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    #[serde(rename = "type")]
    pub etype: EntityType,
    pub surface: String,
}

impl EntitySpan {
    pub fn new(start: usize, end: usize, etype: EntityType, surface: impl Into<String>) -> Self {
        Self {
            start,
            end,
            etype,
            surface: surface.into(),
        }
    }

    /// Builds a span whose surface is taken from `text`. Returns `None`
    /// when the interval is empty or out of bounds.
    pub fn from_text(text: &str, start: usize, end: usize, etype: EntityType) -> Option<Self> {
        if start >= end {
            return None;
        }
        let surface = char_slice(text, start, end)?;
        Some(Self::new(start, end, etype, surface))
    }

    /// The `(start, end, type)` triple that identifies a span for exact
    /// matching and voting.
    pub fn triple(&self) -> (usize, usize, EntityType) {
        (self.start, self.end, self.etype)
    }

    /// Character-interval overlap test (shared by relaxed matching, token
    /// voting, and the error taxonomy).
    pub fn overlaps(&self, other: &EntitySpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Extracts the character slice `[start, end)` of `text`, counting Unicode
/// scalar values. Returns `None` when the bounds exceed the text.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<String> {
    if start > end {
        return None;
    }
    let mut out = String::new();
    let mut count = 0usize;
    for ch in text.chars() {
        if count >= end {
            break;
        }
        if count >= start {
            out.push(ch);
        }
        count += 1;
    }
    if count < end {
        return None;
    }
    Some(out)
}

/// Character length of `text` in Unicode scalar values.
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// A single violated invariant, reported by [`AnnotatedDocument::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A span with `start >= end`.
    SpanOrder { start: usize, end: usize },
    /// A span extending past the end of the text.
    OutOfBounds { start: usize, end: usize, text_len: usize },
    /// The stored surface differs from the text slice it points at.
    SurfaceMismatch { start: usize, end: usize, expected: String, found: String },
    /// The surface carries leading or trailing whitespace.
    SurfaceWhitespace { start: usize, end: usize, surface: String },
    /// Two spans share the same `(start, end, type)` triple.
    DuplicateSpan { start: usize, end: usize, etype: EntityType },
    /// Two spans of the same type overlap.
    SameTypeOverlap {
        etype: EntityType,
        first: (usize, usize),
        second: (usize, usize),
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SpanOrder { start, end } => {
                write!(f, "span ({start}, {end}) violates start < end")
            }
            Violation::OutOfBounds { start, end, text_len } => write!(
                f,
                "span ({start}, {end}) exceeds text length {text_len}"
            ),
            Violation::SurfaceMismatch { start, end, expected, found } => write!(
                f,
                "span ({start}, {end}) surface {found:?} differs from text slice {expected:?}"
            ),
            Violation::SurfaceWhitespace { start, end, surface } => write!(
                f,
                "span ({start}, {end}) surface {surface:?} has leading/trailing whitespace"
            ),
            Violation::DuplicateSpan { start, end, etype } => {
                write!(f, "duplicate span ({start}, {end}, {etype})")
            }
            Violation::SameTypeOverlap { etype, first, second } => write!(
                f,
                "same-type overlap: {etype} spans ({}, {}) and ({}, {})",
                first.0, first.1, second.0, second.1
            ),
        }
    }
}

/// A document with its annotation (or prediction) spans. The same shape is
/// used for gold data, predictor output, and ensemble output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotatedDocument {
    pub doc_id: String,
    pub source: Source,
    pub text: String,
    pub spans: Vec<EntitySpan>,
}

impl AnnotatedDocument {
    pub fn new(
        doc_id: impl Into<String>,
        source: Source,
        text: impl Into<String>,
        spans: Vec<EntitySpan>,
    ) -> Self {
        Self {
            doc_id: doc_id.into(),
            source,
            text: text.into(),
            spans,
        }
    }

    /// Checks every span-level and document-level invariant; the returned
    /// list is empty iff the document is valid. Semantic annotation
    /// guidelines (what should or should not be annotated) are not
    /// machine-checked.
    pub fn validate(&self) -> Vec<Violation> {
        let mut violations = Vec::new();
        let text_len = char_len(&self.text);

        for span in &self.spans {
            if span.start >= span.end {
                violations.push(Violation::SpanOrder {
                    start: span.start,
                    end: span.end,
                });
                continue;
            }
            if span.end > text_len {
                violations.push(Violation::OutOfBounds {
                    start: span.start,
                    end: span.end,
                    text_len,
                });
                continue;
            }
            let slice = char_slice(&self.text, span.start, span.end)
                .expect("bounds checked above");
            if slice != span.surface {
                violations.push(Violation::SurfaceMismatch {
                    start: span.start,
                    end: span.end,
                    expected: slice,
                    found: span.surface.clone(),
                });
            }
            if span.surface.trim() != span.surface {
                violations.push(Violation::SurfaceWhitespace {
                    start: span.start,
                    end: span.end,
                    surface: span.surface.clone(),
                });
            }
        }

        let mut seen = BTreeSet::new();
        for span in &self.spans {
            if !seen.insert(span.triple()) {
                violations.push(Violation::DuplicateSpan {
                    start: span.start,
                    end: span.end,
                    etype: span.etype,
                });
            }
        }

        for etype in EntityType::ALL {
            let mut typed: Vec<&EntitySpan> = self
                .spans
                .iter()
                .filter(|s| s.etype == etype && s.start < s.end)
                .collect();
            typed.sort_by_key(|s| (s.start, s.end));
            for pair in typed.windows(2) {
                // Duplicates are already reported above.
                if pair[1].start < pair[0].end && pair[0].triple() != pair[1].triple() {
                    violations.push(Violation::SameTypeOverlap {
                        etype,
                        first: (pair[0].start, pair[0].end),
                        second: (pair[1].start, pair[1].end),
                    });
                }
            }
        }

        violations
    }

    /// Spans sorted by `(start, end, type)` — the canonical order used on
    /// write and by deterministic consumers.
    pub fn sorted_spans(&self) -> Vec<EntitySpan> {
        let mut spans = self.spans.clone();
        spans.sort();
        spans
    }

    /// Spans of one type, in canonical order.
    pub fn spans_of(&self, etype: EntityType) -> Vec<EntitySpan> {
        let mut spans: Vec<EntitySpan> = self
            .spans
            .iter()
            .filter(|s| s.etype == etype)
            .cloned()
            .collect();
        spans.sort();
        spans
    }
}

/// An ordered collection of documents with unique ids.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    docs: Vec<AnnotatedDocument>,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate document ids.
    pub fn new(docs: Vec<AnnotatedDocument>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for doc in &docs {
            if !seen.insert(doc.doc_id.clone()) {
                return Err(Error::DuplicateDocId {
                    doc_id: doc.doc_id.clone(),
                });
            }
        }
        Ok(Self { docs })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn docs(&self) -> &[AnnotatedDocument] {
        &self.docs
    }

    pub fn iter(&self) -> std::slice::Iter<'_, AnnotatedDocument> {
        self.docs.iter()
    }

    pub fn get(&self, doc_id: &str) -> Option<&AnnotatedDocument> {
        self.docs.iter().find(|d| d.doc_id == doc_id)
    }

    /// Runs [`AnnotatedDocument::validate`] over every document and fails
    /// on the first violation, naming the document and the invariant.
    pub fn validate_all(&self) -> Result<()> {
        for doc in &self.docs {
            if let Some(v) = doc.validate().into_iter().next() {
                return Err(Error::InvalidDocument {
                    doc_id: doc.doc_id.clone(),
                    detail: v.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn into_docs(self) -> Vec<AnnotatedDocument> {
        self.docs
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a AnnotatedDocument;
    type IntoIter = std::slice::Iter<'a, AnnotatedDocument>;

    fn into_iter(self) -> Self::IntoIter {
        self.docs.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str, spans: Vec<EntitySpan>) -> AnnotatedDocument {
        AnnotatedDocument::new("d1", Source::Synthetic, text, spans)
    }

    #[test]
    fn validate_empty_doc_is_clean() {
        assert!(doc("no annotations here", vec![]).validate().is_empty());
    }

    #[test]
    fn validate_rejects_empty_interval() {
        let d = doc("hello", vec![EntitySpan::new(5, 5, EntityType::AdverseEvent, "")]);
        let vs = d.validate();
        assert_eq!(vs.len(), 1);
        assert!(vs[0].to_string().contains("start < end"), "{}", vs[0]);
    }

    #[test]
    fn validate_rejects_same_type_overlap() {
        let d = doc(
            "abcdefghij",
            vec![
                EntitySpan::new(0, 5, EntityType::AdverseEvent, "abcde"),
                EntitySpan::new(3, 8, EntityType::AdverseEvent, "defgh"),
            ],
        );
        let vs = d.validate();
        assert!(vs.iter().any(|v| v.to_string().contains("same-type overlap")));
    }

    #[test]
    fn validate_allows_cross_type_overlap() {
        let d = doc(
            "abcdefghij",
            vec![
                EntitySpan::new(0, 5, EntityType::AdverseEvent, "abcde"),
                EntitySpan::new(3, 8, EntityType::Vaccine, "defgh"),
            ],
        );
        assert!(d.validate().is_empty());
    }

    #[test]
    fn validate_rejects_whitespace_surface() {
        let d = doc("sore arm ", vec![EntitySpan::new(0, 9, EntityType::AdverseEvent, "sore arm ")]);
        let vs = d.validate();
        assert!(vs.iter().any(|v| v.to_string().contains("whitespace")));
    }

    #[test]
    fn validate_rejects_surface_mismatch() {
        let d = doc("sore arm", vec![EntitySpan::new(0, 4, EntityType::AdverseEvent, "arm")]);
        let vs = d.validate();
        assert!(vs.iter().any(|v| v.to_string().contains("differs from text slice")));
    }

    #[test]
    fn validate_rejects_out_of_bounds() {
        let d = doc("abc", vec![EntitySpan::new(1, 9, EntityType::Shot, "bc")]);
        let vs = d.validate();
        assert!(vs.iter().any(|v| v.to_string().contains("exceeds text length")));
    }

    #[test]
    fn validate_rejects_duplicate_triple() {
        let d = doc(
            "abcdef",
            vec![
                EntitySpan::new(0, 3, EntityType::Shot, "abc"),
                EntitySpan::new(0, 3, EntityType::Shot, "abc"),
            ],
        );
        let vs = d.validate();
        assert!(vs.iter().any(|v| v.to_string().contains("duplicate span")));
    }

    #[test]
    fn char_slice_counts_scalar_values() {
        // Multi-byte characters still count as one position each.
        let text = "caf\u{e9} 50\u{20ac}";
        assert_eq!(char_slice(text, 0, 4).unwrap(), "caf\u{e9}");
        assert_eq!(char_slice(text, 5, 8).unwrap(), "50\u{20ac}");
        assert_eq!(char_slice(text, 0, 9), None);
        assert_eq!(char_len(text), 8);
    }

    #[test]
    fn corpus_rejects_duplicate_ids() {
        let a = AnnotatedDocument::new("same", Source::Synthetic, "x", vec![]);
        let b = AnnotatedDocument::new("same", Source::Synthetic, "y", vec![]);
        let err = Corpus::new(vec![a, b]).unwrap_err();
        assert!(err.to_string().contains("same"));
    }

    #[test]
    fn entity_type_parsing_is_closed() {
        assert!("vaccine".parse::<EntityType>().is_ok());
        assert!("dose".parse::<EntityType>().is_err());
        assert!("AE".parse::<EntityType>().is_err());
    }
}
