//! Span-level named entity recognition toolkit for vaccine adverse-event
//! surveillance text.
//!
//! The pipeline: ingest reports and posts into a canonical corpus format
//! ([`corpus`]), extract entity spans with prompt-driven text-generation
//! backends ([`llm`]) or import predictions from files, combine several
//! predictors by majority vote ([`ensemble`]), and score predictions
//! against gold annotations with strict and relaxed span matching
//! ([`eval`]). [`tagging`] holds the shared tokenizer and IOB tag codec;
//! [`synth`] generates deterministic synthetic corpora and noisy
//! predictors for calibration and testing.

pub mod corpus;
pub mod ensemble;
pub mod eval;
pub mod llm;
pub mod rng;
pub mod synth;
pub mod tagging;

mod error;

#[cfg(test)]
pub(crate) mod testutil;

pub use corpus::{AnnotatedDocument, Corpus, EntitySpan, EntityType, Source};
pub use error::{Error, Result};
