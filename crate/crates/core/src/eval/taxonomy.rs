//! Error taxonomy: classifying every mismatch between gold and predicted
//! spans into boundary mismatch, false positive, false negative, or
//! incorrect entity type.
//!
//! Each predicted span falls into exactly one category and consumes at
//! most one gold span, so the categories partition both sides:
//!
//! ```text
//! exact + boundary + incorrect_type + false_positive == |pred|
//! exact + boundary + incorrect_type + false_negative == |gold|
//! ```
//!
//! Boundary mismatches and false negatives are reported against the count
//! of gold spans of that type; false positives and incorrect types
//! against the count of predicted spans of that type.

use std::fmt::Write as _;

use serde::Serialize;

use crate::corpus::{Corpus, EntitySpan, EntityType};
use crate::eval::align;
use crate::{Error, Result};

/// Raw category tallies for one corpus or one document pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ErrorTally {
    /// Exact `(start, end, type)` matches, keyed by type.
    pub exact: [usize; 3],
    /// Same-type overlap with differing boundaries, keyed by the gold
    /// span's type (equal to the predicted type).
    pub boundary_mismatch: [usize; 3],
    /// Predictions overlapping no unconsumed gold span, keyed by the
    /// predicted type.
    pub false_positive: [usize; 3],
    /// Gold spans left unconsumed, keyed by the gold type.
    pub false_negative: [usize; 3],
    /// Predictions overlapping only a gold span of a different type,
    /// keyed by the *predicted* type.
    pub incorrect_type: [usize; 3],
    /// Denominators: gold and predicted span counts per type.
    pub gold_spans: [usize; 3],
    pub predicted_spans: [usize; 3],
}

fn type_index(etype: EntityType) -> usize {
    match etype {
        EntityType::Vaccine => 0,
        EntityType::Shot => 1,
        EntityType::AdverseEvent => 2,
    }
}

impl ErrorTally {
    pub fn add(&mut self, other: &ErrorTally) {
        for i in 0..3 {
            self.exact[i] += other.exact[i];
            self.boundary_mismatch[i] += other.boundary_mismatch[i];
            self.false_positive[i] += other.false_positive[i];
            self.false_negative[i] += other.false_negative[i];
            self.incorrect_type[i] += other.incorrect_type[i];
            self.gold_spans[i] += other.gold_spans[i];
            self.predicted_spans[i] += other.predicted_spans[i];
        }
    }

    pub fn of(&self, field: fn(&Self) -> [usize; 3], etype: EntityType) -> usize {
        field(self)[type_index(etype)]
    }

    pub fn total_exact(&self) -> usize {
        self.exact.iter().sum()
    }
    pub fn total_boundary(&self) -> usize {
        self.boundary_mismatch.iter().sum()
    }
    pub fn total_false_positive(&self) -> usize {
        self.false_positive.iter().sum()
    }
    pub fn total_false_negative(&self) -> usize {
        self.false_negative.iter().sum()
    }
    pub fn total_incorrect_type(&self) -> usize {
        self.incorrect_type.iter().sum()
    }
    pub fn total_gold(&self) -> usize {
        self.gold_spans.iter().sum()
    }
    pub fn total_predicted(&self) -> usize {
        self.predicted_spans.iter().sum()
    }
}

/// Classifies one document's predictions against its gold spans.
///
/// Predicted spans are processed in document order; each takes the first
/// applicable rule and consumes the gold span it matched:
/// 1. exact triple match to an unconsumed gold span;
/// 2. overlap with an unconsumed gold span of the same type (boundary
///    mismatch);
/// 3. overlap with an unconsumed gold span of a different type
///    (incorrect entity type);
/// 4. otherwise a false positive.
///
/// Gold spans still unconsumed afterwards are false negatives.
pub fn categorize_errors(gold: &[EntitySpan], pred: &[EntitySpan]) -> ErrorTally {
    let mut gold_sorted: Vec<&EntitySpan> = gold.iter().collect();
    gold_sorted.sort_by_key(|s| (s.start, s.end, s.etype));
    let mut pred_sorted: Vec<&EntitySpan> = pred.iter().collect();
    pred_sorted.sort_by_key(|s| (s.start, s.end, s.etype));

    let mut tally = ErrorTally::default();
    for g in &gold_sorted {
        tally.gold_spans[type_index(g.etype)] += 1;
    }
    for p in &pred_sorted {
        tally.predicted_spans[type_index(p.etype)] += 1;
    }

    let mut consumed = vec![false; gold_sorted.len()];
    for p in &pred_sorted {
        let exact = gold_sorted
            .iter()
            .enumerate()
            .position(|(i, g)| !consumed[i] && g.triple() == p.triple());
        if let Some(i) = exact {
            consumed[i] = true;
            tally.exact[type_index(p.etype)] += 1;
            continue;
        }
        let same_type_overlap = gold_sorted
            .iter()
            .enumerate()
            .position(|(i, g)| !consumed[i] && g.etype == p.etype && g.overlaps(p));
        if let Some(i) = same_type_overlap {
            consumed[i] = true;
            tally.boundary_mismatch[type_index(p.etype)] += 1;
            continue;
        }
        let cross_type_overlap = gold_sorted
            .iter()
            .enumerate()
            .position(|(i, g)| !consumed[i] && g.etype != p.etype && g.overlaps(p));
        if let Some(i) = cross_type_overlap {
            consumed[i] = true;
            tally.incorrect_type[type_index(p.etype)] += 1;
            continue;
        }
        tally.false_positive[type_index(p.etype)] += 1;
    }
    for (i, g) in gold_sorted.iter().enumerate() {
        if !consumed[i] {
            tally.false_negative[type_index(g.etype)] += 1;
        }
    }
    tally
}

/// Corpus-level error breakdown.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorBreakdown {
    pub tally: ErrorTally,
}

pub fn categorize_corpus(gold: &Corpus, pred: &Corpus) -> Result<ErrorBreakdown> {
    let pairs = align(gold, pred)?;
    let mut tally = ErrorTally::default();
    for (gold_doc, pred_doc) in pairs {
        tally.add(&categorize_errors(&gold_doc.spans, &pred_doc.spans));
    }
    Ok(ErrorBreakdown { tally })
}

/// Formats a count over its denominator as `"n/d, P%"` with `P` rounded
/// half-up to two decimals, or `"n/d, 0%"` when the count is zero.
/// A zero denominator is an error.
pub fn format_ratio(n: u64, d: u64) -> Result<String> {
    if d == 0 {
        return Err(Error::Invalid("ratio denominator must be > 0".into()));
    }
    if n == 0 {
        return Ok(format!("0/{d}, 0%"));
    }
    // Percentage with two decimals, rounded half-up in exact integer
    // arithmetic: scaled = round(10000 * n / d).
    let scaled = (20_000u128 * n as u128 + d as u128) / (2 * d as u128);
    let mut out = String::new();
    let _ = write!(out, "{n}/{d}, {}.{:02}%", scaled / 100, scaled % 100);
    Ok(out)
}
