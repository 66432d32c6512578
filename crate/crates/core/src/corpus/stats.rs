//! Entity-count statistics per corpus and per split.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::corpus::{Corpus, EntityType, Source};

/// Span counts by entity type.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TypeCounts {
    pub vaccine: usize,
    pub shot: usize,
    pub ae: usize,
}

impl TypeCounts {
    pub fn get(&self, etype: EntityType) -> usize {
        match etype {
            EntityType::Vaccine => self.vaccine,
            EntityType::Shot => self.shot,
            EntityType::AdverseEvent => self.ae,
        }
    }

    pub fn bump(&mut self, etype: EntityType) {
        match etype {
            EntityType::Vaccine => self.vaccine += 1,
            EntityType::Shot => self.shot += 1,
            EntityType::AdverseEvent => self.ae += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.vaccine + self.shot + self.ae
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub spans: TypeCounts,
    pub documents_per_source: BTreeMap<Source, usize>,
}

pub fn entity_stats(corpus: &Corpus) -> CorpusStats {
    let mut stats = CorpusStats {
        documents: corpus.len(),
        ..CorpusStats::default()
    };
    for doc in corpus {
        *stats.documents_per_source.entry(doc.source).or_insert(0) += 1;
        for span in &doc.spans {
            stats.spans.bump(span.etype);
        }
    }
    stats
}

/// Renders an aligned table of entity counts, one row per named corpus
/// (typically the train/validation/test splits).
pub fn render_stats(named: &[(String, CorpusStats)]) -> String {
    let name_width = named
        .iter()
        .map(|(name, _)| name.len())
        .chain(["set".len()].into_iter())
        .max()
        .unwrap_or(3);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<name_width$}  {:>6}  {:>8}  {:>6}  {:>6}  {:>6}",
        "set", "docs", "entities", "vacc", "shot", "ae"
    );
    for (name, stats) in named {
        let _ = writeln!(
            out,
            "{:<name_width$}  {:>6}  {:>8}  {:>6}  {:>6}  {:>6}",
            name,
            stats.documents,
            stats.spans.total(),
            stats.spans.vaccine,
            stats.spans.shot,
            stats.spans.ae
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::note_doc;

    #[test]
    fn empty_corpus_all_zero() {
        let stats = entity_stats(&Corpus::empty());
        assert_eq!(stats.documents, 0);
        assert_eq!(stats.spans.total(), 0);
    }

    #[test]
    fn counts_by_type() {
        let corpus = Corpus::new(vec![note_doc()]).unwrap();
        let stats = entity_stats(&corpus);
        assert_eq!(stats.documents, 1);
        assert_eq!(stats.spans.vaccine, 1);
        assert_eq!(stats.spans.ae, 2);
        assert_eq!(stats.spans.shot, 0);
        assert_eq!(stats.documents_per_source.get(&Source::Twitter), Some(&1));
    }

    #[test]
    fn table_renders_one_row_per_split() {
        let corpus = Corpus::new(vec![note_doc()]).unwrap();
        let stats = entity_stats(&corpus);
        let table = render_stats(&[("train".into(), stats.clone()), ("test".into(), stats)]);
        assert_eq!(table.lines().count(), 3);
        assert!(table.lines().nth(1).unwrap().starts_with("train"));
    }
}
