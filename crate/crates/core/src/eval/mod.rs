//! Strict and relaxed span-level evaluation.
//!
//! Strict matching counts a prediction as correct only when its
//! `(start, end, type)` triple appears in the gold set. Relaxed matching
//! pairs predictions and gold spans one-to-one when they share a type and
//! their intervals overlap; the pairing is a *maximum* bipartite matching,
//! not a greedy one, so the count is order-independent and no prediction
//! can claim two gold spans.
//!
//! Scores follow the usual definitions with one convention: an empty
//! denominator scores 1.0, so a perfect empty prediction on an empty gold
//! document is vacuously perfect. Corpus pooling uses raw counts, so the
//! convention only shows up in per-document reporting.

mod matching;
mod report;
mod taxonomy;

pub use matching::{match_relaxed, match_strict, max_bipartite_matching};
pub use report::{
    render_agreement_report, render_error_report, render_score_report, MatchSelector,
};
pub use taxonomy::{categorize_corpus, categorize_errors, format_ratio, ErrorBreakdown, ErrorTally};

use serde::Serialize;

use crate::corpus::{Corpus, EntitySpan, EntityType};
use crate::{Error, Result};

/// True-positive / false-positive / false-negative tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MatchCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl MatchCounts {
    pub fn new(tp: usize, fp: usize, fn_: usize) -> Self {
        Self { tp, fp, fn_ }
    }

    pub fn add(&mut self, other: MatchCounts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn gold_total(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn predicted_total(&self) -> usize {
        self.tp + self.fp
    }
}

/// Precision, recall, and F1 in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntityScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Derives the scores from counts, with empty denominators scoring 1.0.
pub fn score(mc: MatchCounts) -> EntityScore {
    let precision = if mc.tp + mc.fp == 0 {
        1.0
    } else {
        mc.tp as f64 / (mc.tp + mc.fp) as f64
    };
    let recall = if mc.tp + mc.fn_ == 0 {
        1.0
    } else {
        mc.tp as f64 / (mc.tp + mc.fn_) as f64
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    EntityScore {
        precision,
        recall,
        f1,
    }
}

/// One row of a score report: counts plus derived scores for one entity
/// type (or the pooled micro-average row).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScoreRow {
    pub counts: MatchCounts,
    pub scores: EntityScore,
}

impl ScoreRow {
    fn from_counts(counts: MatchCounts) -> Self {
        Self {
            counts,
            scores: score(counts),
        }
    }
}

/// Per-type rows plus the micro-average row for one matching regime.
#[derive(Debug, Clone, Serialize)]
pub struct ScoreSection {
    pub per_type: Vec<(EntityType, ScoreRow)>,
    pub micro: ScoreRow,
}

impl ScoreSection {
    fn from_per_type(per_type: Vec<(EntityType, MatchCounts)>) -> Self {
        let mut pooled = MatchCounts::default();
        for (_, counts) in &per_type {
            pooled.add(*counts);
        }
        ScoreSection {
            per_type: per_type
                .into_iter()
                .map(|(t, c)| (t, ScoreRow::from_counts(c)))
                .collect(),
            micro: ScoreRow::from_counts(pooled),
        }
    }

    pub fn row(&self, etype: EntityType) -> &ScoreRow {
        &self
            .per_type
            .iter()
            .find(|(t, _)| *t == etype)
            .expect("all three types present")
            .1
    }
}

/// Strict and relaxed sections over the same corpus pair.
#[derive(Debug, Clone, Serialize)]
pub struct ScoreReport {
    pub strict: ScoreSection,
    pub relaxed: ScoreSection,
}

/// Checks that `gold` and `pred` cover the same documents with identical
/// text, and returns the documents paired in gold order.
pub(crate) fn align<'a>(
    gold: &'a Corpus,
    pred: &'a Corpus,
) -> Result<Vec<(&'a crate::AnnotatedDocument, &'a crate::AnnotatedDocument)>> {
    let mut pairs = Vec::with_capacity(gold.len());
    for gold_doc in gold {
        let pred_doc = pred.get(&gold_doc.doc_id).ok_or_else(|| Error::CorpusMismatch {
            doc_id: gold_doc.doc_id.clone(),
            detail: "document missing from predictions".into(),
        })?;
        if pred_doc.text != gold_doc.text {
            return Err(Error::CorpusMismatch {
                doc_id: gold_doc.doc_id.clone(),
                detail: "document text differs between corpora".into(),
            });
        }
        pairs.push((gold_doc, pred_doc));
    }
    if let Some(extra) = pred.iter().find(|d| gold.get(&d.doc_id).is_none()) {
        return Err(Error::CorpusMismatch {
            doc_id: extra.doc_id.clone(),
            detail: "document has predictions but no gold annotation".into(),
        });
    }
    Ok(pairs)
}

fn typed(spans: &[EntitySpan], etype: EntityType) -> Vec<EntitySpan> {
    spans.iter().filter(|s| s.etype == etype).cloned().collect()
}

/// Scores `pred` against `gold` over a whole corpus: per-type counts are
/// summed across documents, then scored; the micro-average rows pool the
/// counts across the three types.
pub fn score_corpus(gold: &Corpus, pred: &Corpus) -> Result<ScoreReport> {
    let pairs = align(gold, pred)?;
    let mut strict = Vec::new();
    let mut relaxed = Vec::new();
    for etype in EntityType::ALL {
        let mut strict_counts = MatchCounts::default();
        let mut relaxed_counts = MatchCounts::default();
        for (gold_doc, pred_doc) in &pairs {
            let g = typed(&gold_doc.spans, etype);
            let p = typed(&pred_doc.spans, etype);
            strict_counts.add(match_strict(&g, &p));
            relaxed_counts.add(match_relaxed(&g, &p));
        }
        strict.push((etype, strict_counts));
        relaxed.push((etype, relaxed_counts));
    }
    Ok(ScoreReport {
        strict: ScoreSection::from_per_type(strict),
        relaxed: ScoreSection::from_per_type(relaxed),
    })
}

/// Agreement between two annotators of the same documents.
#[derive(Debug, Clone, Serialize)]
pub struct AgreementReport {
    pub per_type: Vec<(EntityType, f64)>,
    pub overall: f64,
}

/// Pairwise agreement as strict F1 of `b` against `a`. The F1 identity
/// `2tp / (|a| + |b|)` makes the measure symmetric in the two annotators;
/// the overall value pools counts across types.
pub fn agreement(a: &Corpus, b: &Corpus) -> Result<AgreementReport> {
    let report = score_corpus(a, b)?;
    Ok(AgreementReport {
        per_type: report
            .strict
            .per_type
            .iter()
            .map(|(t, row)| (*t, row.scores.f1))
            .collect(),
        overall: report.strict.micro.scores.f1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AnnotatedDocument;
    use crate::testutil::note_doc;
    use crate::Source;

    fn ae(start: usize, end: usize) -> EntitySpan {
        let surface = "x".repeat(end - start);
        EntitySpan::new(start, end, EntityType::AdverseEvent, surface)
    }

    #[test]
    fn score_examples() {
        let s = score(MatchCounts::new(1, 2, 1));
        assert!((s.precision - 1.0 / 3.0).abs() < 1e-12);
        assert!((s.recall - 0.5).abs() < 1e-12);
        assert!((s.f1 - 0.4).abs() < 1e-12);

        let vacuous = score(MatchCounts::new(0, 0, 0));
        assert_eq!((vacuous.precision, vacuous.recall, vacuous.f1), (1.0, 1.0, 1.0));

        let zero = score(MatchCounts::new(0, 3, 2));
        assert_eq!((zero.precision, zero.recall, zero.f1), (0.0, 0.0, 0.0));
    }

    fn two_doc_pair() -> (Corpus, Corpus) {
        // Doc 1: gold one ae span, predicted exactly -> (1, 0, ...) with
        // one gold missed; doc 2: one spurious prediction.
        let text = "aaaa bbbb cccc";
        let gold = Corpus::new(vec![
            AnnotatedDocument::new(
                "d1",
                Source::Synthetic,
                text,
                vec![ae(0, 4), ae(5, 9)],
            ),
            AnnotatedDocument::new("d2", Source::Synthetic, text, vec![]),
        ])
        .unwrap();
        let pred = Corpus::new(vec![
            AnnotatedDocument::new("d1", Source::Synthetic, text, vec![ae(0, 4)]),
            AnnotatedDocument::new("d2", Source::Synthetic, text, vec![ae(10, 14)]),
        ])
        .unwrap();
        (gold, pred)
    }

    #[test]
    fn pools_counts_before_scoring() {
        let (gold, pred) = two_doc_pair();
        let report = score_corpus(&gold, &pred).unwrap();
        let row = report.strict.row(EntityType::AdverseEvent);
        assert_eq!(row.counts, MatchCounts::new(1, 1, 1));
        assert!((row.scores.f1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identical_corpora_score_one() {
        let corpus = Corpus::new(vec![note_doc()]).unwrap();
        let report = score_corpus(&corpus, &corpus).unwrap();
        for (_, row) in &report.strict.per_type {
            assert_eq!(row.scores.f1, 1.0);
        }
        assert_eq!(report.strict.micro.scores.f1, 1.0);
        assert_eq!(report.relaxed.micro.scores.f1, 1.0);
    }

    #[test]
    fn micro_counts_are_the_sum_of_per_type() {
        let (gold, pred) = two_doc_pair();
        let report = score_corpus(&gold, &pred).unwrap();
        for section in [&report.strict, &report.relaxed] {
            let mut summed = MatchCounts::default();
            for (_, row) in &section.per_type {
                summed.add(row.counts);
            }
            assert_eq!(summed, section.micro.counts);
        }
    }

    #[test]
    fn alignment_mismatch_names_the_document() {
        let corpus = Corpus::new(vec![note_doc()]).unwrap();
        let err = score_corpus(&corpus, &Corpus::empty()).unwrap_err();
        assert!(err.to_string().contains("twitter:fixture-1"), "{err}");
    }

    #[test]
    fn agreement_of_identical_annotations_is_one() {
        let corpus = Corpus::new(vec![note_doc()]).unwrap();
        let report = agreement(&corpus, &corpus).unwrap();
        assert!(report.per_type.iter().all(|(_, v)| *v == 1.0));
        assert_eq!(report.overall, 1.0);
    }

    #[test]
    fn agreement_of_disjoint_annotations_is_zero() {
        let text = "aaaa bbbb";
        let a = Corpus::new(vec![AnnotatedDocument::new(
            "d",
            Source::Synthetic,
            text,
            vec![ae(0, 4)],
        )])
        .unwrap();
        let b = Corpus::new(vec![AnnotatedDocument::new(
            "d",
            Source::Synthetic,
            text,
            vec![ae(5, 9)],
        )])
        .unwrap();
        let report = agreement(&a, &b).unwrap();
        assert_eq!(report.overall, 0.0);
    }

    #[test]
    fn agreement_two_to_one() {
        // a has two ae spans, b reproduces one: F1 = 2·1/(2+1) = 2/3.
        let text = "aaaa bbbb";
        let a = Corpus::new(vec![AnnotatedDocument::new(
            "d",
            Source::Synthetic,
            text,
            vec![ae(0, 4), ae(5, 9)],
        )])
        .unwrap();
        let b = Corpus::new(vec![AnnotatedDocument::new(
            "d",
            Source::Synthetic,
            text,
            vec![ae(0, 4)],
        )])
        .unwrap();
        let forward = agreement(&a, &b).unwrap();
        let backward = agreement(&b, &a).unwrap();
        let ae_row = |r: &AgreementReport| {
            r.per_type
                .iter()
                .find(|(t, _)| *t == EntityType::AdverseEvent)
                .unwrap()
                .1
        };
        assert!((ae_row(&forward) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(ae_row(&forward), ae_row(&backward));
    }
}
