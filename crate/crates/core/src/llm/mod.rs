//! Prompt-based entity extraction.
//!
//! A predictor here is a chat-completions backend driven by one prompt
//! template: split style issues one completion per entity type, merged
//! style one completion per note. Raw generations are parsed into entity
//! strings, grounded back onto the note as character spans, and assembled
//! into a prediction document that satisfies every corpus invariant.
//! Predictions supplied directly in the canonical corpus format bypass
//! this module entirely.

mod backend;
mod cache;
mod ground;
mod parse;
mod template;

pub use backend::{Backend, BackendConfig};
pub use cache::{cache_key, prompt_text, CacheParams, CacheRecord, PredictionCache};
pub use ground::{ground, GroundStats};
pub use parse::{parse_generation, ClaimedType, ParseOutcome, ParsedEntity};
pub use template::{prompt_entity_name, render_prompt, Message, PromptStyle, PromptTemplate};

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedDocument, Corpus, EntitySpan, EntityType};
use crate::ensemble::merge_same_type_overlaps;
use crate::{Error, Result};

/// Decoding controls for the generation backend.
///
/// The defaults mirror the strongest single generative configuration this
/// pipeline was tuned for: temperature 0.3 with a 4,096-token output
/// budget.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GenerationParams {
    #[serde(rename = "model")]
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self {
            model_name: "gpt-35-turbo-0125".into(),
            temperature: 0.3,
            max_output_tokens: 4096,
        }
    }
}

impl GenerationParams {
    pub fn validate(&self) -> Result<()> {
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(Error::Config(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if self.max_output_tokens < 1 {
            return Err(Error::Config("max_output_tokens must be >= 1".into()));
        }
        Ok(())
    }
}

/// Counters accumulated while predicting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PredictStats {
    /// Completions issued (cache hits included).
    pub completions: usize,
    /// Entity strings with no occurrence in their note.
    pub ungrounded: usize,
    /// Spans produced by grounding.
    pub grounded_spans: usize,
    /// Same-type overlapping spans merged into a union interval.
    pub merged_overlaps: usize,
    /// Merged-style lines whose label mapped to no entity type.
    pub unknown_type_lines: usize,
    /// Merged-style bare lines, which carry no type to ground with.
    pub unlabeled_lines: usize,
    /// Lines skipped by the parser (refusals, empty list items).
    pub skipped_lines: usize,
}

impl PredictStats {
    pub fn absorb(&mut self, other: PredictStats) {
        self.completions += other.completions;
        self.ungrounded += other.ungrounded;
        self.grounded_spans += other.grounded_spans;
        self.merged_overlaps += other.merged_overlaps;
        self.unknown_type_lines += other.unknown_type_lines;
        self.unlabeled_lines += other.unlabeled_lines;
        self.skipped_lines += other.skipped_lines;
    }
}

/// Predicts spans for one document: renders the prompt(s), completes,
/// parses, grounds, then deduplicates and merges same-type overlaps so
/// the output document always validates.
pub fn predict_document(
    doc: &AnnotatedDocument,
    template: &PromptTemplate,
    params: &GenerationParams,
    backend: &Backend,
) -> Result<(AnnotatedDocument, PredictStats)> {
    let mut stats = PredictStats::default();
    let mut ground_stats = GroundStats::default();
    let mut spans: BTreeSet<EntitySpan> = BTreeSet::new();

    let rounds: Vec<Option<EntityType>> = match template.style() {
        PromptStyle::Split => EntityType::ALL.iter().copied().map(Some).collect(),
        PromptStyle::Merged => vec![None],
    };

    for etype in rounds {
        let messages = render_prompt(template, &doc.text, etype)?;
        let raw = backend.complete(params, &messages)?;
        stats.completions += 1;
        let parsed = parse_generation(&raw, template.style());
        stats.skipped_lines += parsed.skipped;

        for entity in parsed.entities {
            let target = match (etype, &entity.claim) {
                // Split style: the request named the type.
                (Some(requested), _) => requested,
                // Merged style: trust the line's label.
                (None, ClaimedType::Known(t)) => *t,
                (None, ClaimedType::Unknown(_)) => {
                    stats.unknown_type_lines += 1;
                    continue;
                }
                (None, ClaimedType::Unlabeled) => {
                    stats.unlabeled_lines += 1;
                    continue;
                }
            };
            spans.extend(ground(&doc.text, &entity.text, target, &mut ground_stats));
        }
    }
    stats.ungrounded = ground_stats.ungrounded;
    stats.grounded_spans = ground_stats.grounded_spans;

    let (merged, merge_events) =
        merge_same_type_overlaps(&doc.text, spans.into_iter().collect());
    stats.merged_overlaps = merge_events;

    Ok((
        AnnotatedDocument::new(doc.doc_id.clone(), doc.source, doc.text.clone(), merged),
        stats,
    ))
}

/// Predicts a whole corpus, running up to `max_parallel` documents
/// concurrently. Output order follows input order regardless of
/// scheduling; errors surface for the earliest failing document.
pub fn predict_corpus(
    corpus: &Corpus,
    template: &PromptTemplate,
    params: &GenerationParams,
    backend: &Backend,
) -> Result<(Corpus, PredictStats)> {
    params.validate()?;
    let workers = backend.config().max_parallel.max(1).min(corpus.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<(AnnotatedDocument, PredictStats)>>>> =
        Mutex::new((0..corpus.len()).map(|_| None).collect());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= corpus.len() {
                    break;
                }
                let outcome = predict_document(&corpus.docs()[index], template, params, backend);
                results.lock().expect("results lock")[index] = Some(outcome);
            });
        }
    });

    let mut docs = Vec::with_capacity(corpus.len());
    let mut stats = PredictStats::default();
    for slot in results.into_inner().expect("results lock") {
        let (doc, doc_stats) = slot.expect("every index visited")?;
        stats.absorb(doc_stats);
        docs.push(doc);
    }
    Ok((Corpus::new(docs)?, stats))
}
