//! Deterministic synthetic corpora and noisy predictors.
//!
//! The generator builds documents from a fixed word list with spans
//! aligned to token boundaries, and the perturber degrades a gold corpus
//! into a plausible predictor: spans are dropped, boundaries jittered by
//! one token, and spurious spans inserted. Both are pure functions of
//! their seeds — per-document sub-seeds come from a splitmix64 scramble
//! of the master seed XORed with the document index — so parallel and
//! sequential runs produce identical corpora.

use std::ops::RangeInclusive;

use crate::corpus::{AnnotatedDocument, Corpus, EntitySpan, EntityType, Source};
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// Noise parameters for one synthetic predictor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseProfile {
    /// Probability that a gold span is dropped.
    pub p_delete: f64,
    /// Expected spurious spans per document (Poisson mean).
    pub p_spurious: f64,
    /// Probability that a surviving span has one boundary moved by one
    /// token.
    pub p_jitter: f64,
    pub seed: u64,
}

impl NoiseProfile {
    pub fn new(p_delete: f64, p_spurious: f64, p_jitter: f64, seed: u64) -> Result<Self> {
        for (name, p) in [("p_delete", p_delete), ("p_jitter", p_jitter)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Invalid(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        if !p_spurious.is_finite() || p_spurious < 0.0 {
            return Err(Error::Invalid(format!(
                "p_spurious must be >= 0, got {p_spurious}"
            )));
        }
        Ok(Self {
            p_delete,
            p_spurious,
            p_jitter,
            seed,
        })
    }

    /// The profile for predictor `index` in an independent committee:
    /// same noise rates, sub-seed decorrelated from siblings.
    pub fn for_predictor(&self, master_seed: u64, index: u64) -> NoiseProfile {
        NoiseProfile {
            seed: master_seed ^ index,
            ..*self
        }
    }
}

const WORDS: &[&str] = &[
    "patient", "reported", "fever", "arm", "sore", "pain", "mild", "severe", "headache",
    "after", "first", "second", "booster", "day", "chills", "tired", "injection", "site",
    "rash", "nausea", "dizzy", "ache", "swelling", "redness", "felt", "had", "the", "and",
    "was", "with", "on", "for", "a", "then", "next", "week", "morning", "night", "two",
    "hours",
];

/// Word-boundary positions for a document of `word_lengths`: returns
/// `(start, end)` character offsets per word with single-space joints.
fn word_offsets(word_lengths: &[usize]) -> Vec<(usize, usize)> {
    let mut offsets = Vec::with_capacity(word_lengths.len());
    let mut pos = 0;
    for &len in word_lengths {
        offsets.push((pos, pos + len));
        pos += len + 1;
    }
    offsets
}

/// Generates a gold corpus: `n_docs` documents of random words, each with
/// a number of spans drawn from `spans_per_doc`. Spans are aligned to
/// token boundaries and mutually non-overlapping (across all types), so
/// the corpus round-trips losslessly through IOB encoding.
pub fn gen_gold(seed: u64, n_docs: usize, spans_per_doc: RangeInclusive<usize>) -> Corpus {
    let docs = (0..n_docs)
        .map(|i| gen_doc(seed, i, &spans_per_doc))
        .collect();
    Corpus::new(docs).expect("generated ids are unique")
}

fn gen_doc(seed: u64, index: usize, spans_per_doc: &RangeInclusive<usize>) -> AnnotatedDocument {
    let mut rng = SplitMix64::new(seed ^ index as u64);
    let n_words = rng.next_in(12, 28) as usize;
    let words: Vec<&str> = (0..n_words)
        .map(|_| WORDS[rng.next_below(WORDS.len() as u64) as usize])
        .collect();
    let text = words.join(" ");
    let offsets = word_offsets(&words.iter().map(|w| w.len()).collect::<Vec<_>>());

    let want = rng.next_in(*spans_per_doc.start() as u64, *spans_per_doc.end() as u64) as usize;
    let mut spans: Vec<EntitySpan> = Vec::new();
    let mut taken: Vec<(usize, usize)> = Vec::new(); // claimed token ranges
    for _ in 0..want {
        for _attempt in 0..20 {
            let len = rng.next_in(1, 3.min(n_words as u64)) as usize;
            let first = rng.next_below((n_words - len + 1) as u64) as usize;
            let last = first + len - 1;
            if taken.iter().any(|&(a, b)| first <= b && a <= last) {
                continue;
            }
            let etype = EntityType::ALL[rng.next_below(3) as usize];
            let span =
                EntitySpan::from_text(&text, offsets[first].0, offsets[last].1, etype)
                    .expect("token-aligned interval is valid");
            taken.push((first, last));
            spans.push(span);
            break;
        }
    }
    spans.sort();
    AnnotatedDocument::new(
        format!("synthetic:{index:05}"),
        Source::Synthetic,
        text,
        spans,
    )
}

/// Applies a noise profile to a gold corpus, producing one synthetic
/// predictor's output. Deterministic per `(profile.seed, document index)`.
pub fn perturb(gold: &Corpus, profile: &NoiseProfile) -> Corpus {
    let docs = gold
        .iter()
        .enumerate()
        .map(|(i, doc)| perturb_doc(doc, i, profile))
        .collect();
    Corpus::new(docs).expect("ids preserved from gold")
}

fn perturb_doc(doc: &AnnotatedDocument, index: usize, profile: &NoiseProfile) -> AnnotatedDocument {
    let mut rng = SplitMix64::new(profile.seed ^ index as u64);
    let tokens = crate::tagging::tokenize(&doc.text);

    let gold_spans = doc.sorted_spans();
    let mut spans: Vec<EntitySpan> = Vec::new();
    for (i, span) in gold_spans.iter().enumerate() {
        if rng.chance(profile.p_delete) {
            continue;
        }
        let mut kept = span.clone();
        if rng.chance(profile.p_jitter) {
            // A jittered boundary may not invade other accepted spans nor
            // the original positions of same-type siblings, so survivors
            // never collide.
            let others: Vec<&EntitySpan> = spans
                .iter()
                .chain(gold_spans.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, s)| s))
                .collect();
            if let Some(jittered) = jitter(&kept, &tokens, &others, &doc.text, &mut rng) {
                kept = jittered;
            }
        }
        if !overlaps_same_type(&spans, &kept) {
            spans.push(kept);
        }
    }

    let spurious = rng.poisson(profile.p_spurious);
    for _ in 0..spurious {
        for _attempt in 0..20 {
            let len = rng.next_in(1, 3.min(tokens.len() as u64)) as usize;
            if tokens.len() < len {
                break;
            }
            let first = rng.next_below((tokens.len() - len + 1) as u64) as usize;
            let last = first + len - 1;
            let etype = EntityType::ALL[rng.next_below(3) as usize];
            let Some(candidate) = EntitySpan::from_text(
                &doc.text,
                tokens[first].start,
                tokens[last].end,
                etype,
            ) else {
                continue;
            };
            if overlaps_same_type(&spans, &candidate)
                || spans.iter().any(|s| s.triple() == candidate.triple())
            {
                continue;
            }
            spans.push(candidate);
            break;
        }
    }

    spans.sort();
    AnnotatedDocument::new(doc.doc_id.clone(), doc.source, doc.text.clone(), spans)
}

fn overlaps_same_type(spans: &[EntitySpan], candidate: &EntitySpan) -> bool {
    spans
        .iter()
        .any(|s| s.etype == candidate.etype && s.overlaps(candidate))
}

/// Moves one boundary of `span` by one token, staying inside the text and
/// away from same-type neighbours. Returns `None` when no legal move
/// exists (the span is then kept unchanged).
fn jitter(
    span: &EntitySpan,
    tokens: &[crate::tagging::Token],
    others: &[&EntitySpan],
    text: &str,
    rng: &mut SplitMix64,
) -> Option<EntitySpan> {
    let first = tokens.iter().position(|t| t.start == span.start)?;
    let last = tokens.iter().position(|t| t.end == span.end)?;

    // Candidate moves: grow/shrink either boundary by one token.
    let mut moves: Vec<(usize, usize)> = Vec::new();
    if first > 0 {
        moves.push((first - 1, last));
    }
    if last + 1 < tokens.len() {
        moves.push((first, last + 1));
    }
    if first < last {
        moves.push((first + 1, last));
        moves.push((first, last - 1));
    }
    if moves.is_empty() {
        return None;
    }
    let (new_first, new_last) = moves[rng.next_below(moves.len() as u64) as usize];
    let candidate = EntitySpan::from_text(
        text,
        tokens[new_first].start,
        tokens[new_last].end,
        span.etype,
    )?;
    if others
        .iter()
        .any(|s| s.etype == candidate.etype && s.overlaps(&candidate))
    {
        return None;
    }
    Some(candidate)
}
