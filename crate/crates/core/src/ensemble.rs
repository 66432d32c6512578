//! Majority voting over several predictors.
//!
//! Span mode (the default) counts votes per exact `(start, end, type)`
//! triple: a triple is emitted iff at least `threshold` of the `k`
//! predictors contain it, each contributing at most one vote. Exact-triple
//! counting keeps the operation order-independent and trivially auditable,
//! but is brittle to one-character boundary disagreements; token mode
//! votes per token instead, emitting maximal runs of tokens covered by at
//! least `threshold` same-type spans.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::corpus::{AnnotatedDocument, Corpus, EntitySpan, EntityType};
use crate::tagging::tokenize;
use crate::{Error, Result};

/// Voting granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VoteMode {
    #[default]
    Span,
    Token,
}

impl FromStr for VoteMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "span" => Ok(VoteMode::Span),
            "token" => Ok(VoteMode::Token),
            other => Err(Error::Invalid(format!(
                "unknown ensemble mode {other:?} (expected span or token)"
            ))),
        }
    }
}

/// Simple majority for `k` voters: `floor(k/2) + 1`.
pub fn default_threshold(k: usize) -> usize {
    k / 2 + 1
}

/// Span-exact voting for one document. Every emitted triple appears
/// verbatim in at least `threshold` member sets.
pub fn vote_spans(predictions: &[&[EntitySpan]], threshold: usize) -> Vec<EntitySpan> {
    let mut votes: BTreeMap<(usize, usize, EntityType), (usize, EntitySpan)> = BTreeMap::new();
    for member in predictions {
        let mut uniques: Vec<&EntitySpan> = member.iter().collect();
        uniques.sort_by_key(|s| s.triple());
        uniques.dedup_by_key(|s| s.triple());
        for span in uniques {
            votes
                .entry(span.triple())
                .and_modify(|(count, _)| *count += 1)
                .or_insert_with(|| (1, span.clone()));
        }
    }
    votes
        .into_values()
        .filter(|(count, _)| *count >= threshold)
        .map(|(_, span)| span)
        .collect()
}

/// Token-level voting for one document: a token is covered for a type iff
/// at least `threshold` predictors have a span of that type overlapping
/// it; maximal covered runs become spans. Boundary-tolerant by design.
pub fn vote_tokens(text: &str, predictions: &[&[EntitySpan]], threshold: usize) -> Vec<EntitySpan> {
    let tokens = tokenize(text);
    let mut out = Vec::new();
    for etype in EntityType::ALL {
        let covered: Vec<bool> = tokens
            .iter()
            .map(|token| {
                let token_span = (token.start, token.end);
                let votes = predictions
                    .iter()
                    .filter(|member| {
                        member.iter().any(|s| {
                            s.etype == etype
                                && s.start < token_span.1
                                && token_span.0 < s.end
                        })
                    })
                    .count();
                votes >= threshold
            })
            .collect();

        let mut i = 0;
        while i < tokens.len() {
            if !covered[i] {
                i += 1;
                continue;
            }
            let run_start = i;
            while i < tokens.len() && covered[i] {
                i += 1;
            }
            if let Some(span) = EntitySpan::from_text(
                text,
                tokens[run_start].start,
                tokens[i - 1].end,
                etype,
            ) {
                out.push(span);
            }
        }
    }
    out.sort();
    out
}

/// A committee of aligned prediction corpora plus the voting parameters.
#[derive(Debug, Clone)]
pub struct EnsembleInput {
    members: Vec<Corpus>,
    mode: VoteMode,
    threshold: usize,
}

impl EnsembleInput {
    /// Validates the committee: at least two members, a threshold within
    /// `1..=k` (defaulting to simple majority), identical document id
    /// sets, and identical text per id. Errors name the first offending
    /// document.
    pub fn new(members: Vec<Corpus>, mode: VoteMode, threshold: Option<usize>) -> Result<Self> {
        let k = members.len();
        if k < 2 {
            return Err(Error::Invalid(format!(
                "an ensemble needs at least 2 prediction corpora, got {k}"
            )));
        }
        let threshold = threshold.unwrap_or_else(|| default_threshold(k));
        if threshold < 1 || threshold > k {
            return Err(Error::Invalid(format!(
                "threshold {threshold} outside 1..={k}"
            )));
        }
        let first = &members[0];
        for member in &members[1..] {
            for doc in first {
                let other = member.get(&doc.doc_id).ok_or_else(|| Error::CorpusMismatch {
                    doc_id: doc.doc_id.clone(),
                    detail: "document missing from an ensemble member".into(),
                })?;
                if other.text != doc.text {
                    return Err(Error::CorpusMismatch {
                        doc_id: doc.doc_id.clone(),
                        detail: "document text differs across ensemble members".into(),
                    });
                }
            }
            if let Some(extra) = member.iter().find(|d| first.get(&d.doc_id).is_none()) {
                return Err(Error::CorpusMismatch {
                    doc_id: extra.doc_id.clone(),
                    detail: "document present in only some ensemble members".into(),
                });
            }
        }
        Ok(Self {
            members,
            mode,
            threshold,
        })
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    /// Votes document by document, in the first member's order.
    ///
    /// With sub-majority thresholds, span mode can emit same-type triples
    /// that overlap (they came from different members); those are merged
    /// to their union interval so the output is always a valid corpus.
    /// At majority thresholds no merge can trigger.
    pub fn run(&self) -> Corpus {
        let docs = self.members[0]
            .iter()
            .map(|doc| {
                let sets: Vec<&[EntitySpan]> = self
                    .members
                    .iter()
                    .map(|m| m.get(&doc.doc_id).expect("validated in new").spans.as_slice())
                    .collect();
                let mut spans = match self.mode {
                    VoteMode::Span => vote_spans(&sets, self.threshold),
                    VoteMode::Token => vote_tokens(&doc.text, &sets, self.threshold),
                };
                if matches!(self.mode, VoteMode::Span) {
                    spans = merge_same_type_overlaps(&doc.text, spans).0;
                }
                AnnotatedDocument::new(doc.doc_id.clone(), doc.source, doc.text.clone(), spans)
            })
            .collect();
        Corpus::new(docs).expect("ids unique in member 0")
    }
}

/// Merges same-type overlapping spans to their union interval, returning
/// the merged spans and the number of merge events (absorbed spans).
pub fn merge_same_type_overlaps(text: &str, mut spans: Vec<EntitySpan>) -> (Vec<EntitySpan>, usize) {
    spans.sort();
    let mut merges = 0;
    let mut out: Vec<EntitySpan> = Vec::with_capacity(spans.len());
    for etype in EntityType::ALL {
        let mut run: Option<(usize, usize)> = None;
        for span in spans.iter().filter(|s| s.etype == etype) {
            match &mut run {
                Some((_, end)) if span.start < *end => {
                    *end = (*end).max(span.end);
                    merges += 1;
                }
                Some(range) => {
                    push_span(text, *range, etype, &mut out);
                    run = Some((span.start, span.end));
                }
                None => run = Some((span.start, span.end)),
            }
        }
        if let Some(range) = run {
            push_span(text, range, etype, &mut out);
        }
    }
    out.sort();
    (out, merges)
}

fn push_span(text: &str, (start, end): (usize, usize), etype: EntityType, out: &mut Vec<EntitySpan>) {
    if let Some(span) = EntitySpan::from_text(text, start, end, etype) {
        out.push(span);
    }
}

/// Convenience wrapper: build the committee and vote.
pub fn ensemble_corpus(
    members: Vec<Corpus>,
    mode: VoteMode,
    threshold: Option<usize>,
) -> Result<Corpus> {
    Ok(EnsembleInput::new(members, mode, threshold)?.run())
}
