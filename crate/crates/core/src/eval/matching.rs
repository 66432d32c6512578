//! Strict and relaxed span matchers.

use std::collections::BTreeSet;

use crate::corpus::EntitySpan;
use crate::eval::MatchCounts;

/// Exact-triple matching: a prediction is a true positive iff its
/// `(start, end, type)` triple appears in the gold set.
pub fn match_strict(gold: &[EntitySpan], pred: &[EntitySpan]) -> MatchCounts {
    let gold_triples: BTreeSet<_> = gold.iter().map(EntitySpan::triple).collect();
    let pred_triples: BTreeSet<_> = pred.iter().map(EntitySpan::triple).collect();
    let tp = gold_triples.intersection(&pred_triples).count();
    MatchCounts::new(tp, pred_triples.len() - tp, gold_triples.len() - tp)
}

/// Overlap matching: gold and predicted spans are paired one-to-one when
/// they share a type and their intervals intersect; `tp` is the size of a
/// maximum bipartite matching over those pairs.
///
/// Maximum (not greedy) matching matters: with gold {(0,10), (4,6)} and
/// predictions {(4,6), (0,3)}, a greedy left-to-right pairing reaches one
/// pair while the maximum pairs both.
pub fn match_relaxed(gold: &[EntitySpan], pred: &[EntitySpan]) -> MatchCounts {
    let adjacency: Vec<Vec<usize>> = gold
        .iter()
        .map(|g| {
            pred.iter()
                .enumerate()
                .filter(|(_, p)| p.etype == g.etype && g.overlaps(p))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let tp = max_bipartite_matching(&adjacency, pred.len());
    MatchCounts::new(tp, pred.len() - tp, gold.len() - tp)
}

/// Maximum bipartite matching by Kuhn's augmenting-path algorithm.
/// `adjacency[u]` lists the right-side vertices reachable from left
/// vertex `u`. O(V·E), ample for per-document span counts.
pub fn max_bipartite_matching(adjacency: &[Vec<usize>], n_right: usize) -> usize {
    let mut matched_right: Vec<Option<usize>> = vec![None; n_right];
    let mut size = 0;
    for u in 0..adjacency.len() {
        let mut seen = vec![false; n_right];
        if try_augment(adjacency, u, &mut seen, &mut matched_right) {
            size += 1;
        }
    }
    size
}

fn try_augment(
    adjacency: &[Vec<usize>],
    u: usize,
    seen: &mut [bool],
    matched_right: &mut [Option<usize>],
) -> bool {
    for &v in &adjacency[u] {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        let free_or_movable = match matched_right[v] {
            None => true,
            Some(prev) => try_augment(adjacency, prev, seen, matched_right),
        };
        if free_or_movable {
            matched_right[v] = Some(u);
            return true;
        }
    }
    false
}
