//! Relevance scoring, overlap removal and evidence selection.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::backend::{call_relevance, BackendError, Scorer};
use crate::kg::{KgError, Passage, ScoredPassage, Verbalisation};

/// Default evidence-set size.
pub const EVIDENCE_SIZE: usize = 5;

/// Relevance threshold separating likely relevant from likely irrelevant
/// passages.
pub const RELEVANCE_THRESHOLD: f64 = 0.0;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("no passages to score")]
    NoPassages,
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Kg(#[from] KgError),
}

/// Scores every passage against the claim, preserving order.
pub fn score_passages(
    v: &Verbalisation,
    passages: &[Passage],
    backend: &dyn Scorer,
) -> Result<Vec<ScoredPassage>, SelectionError> {
    if passages.is_empty() {
        return Err(SelectionError::NoPassages);
    }
    let texts: Vec<String> = passages.iter().map(|p| p.text().to_owned()).collect();
    let scores = call_relevance(backend, v.text(), &texts)?;
    passages
        .iter()
        .zip(scores)
        .map(|(p, s)| ScoredPassage::new(p.clone(), s).map_err(Into::into))
        .collect()
}

/// Drops every passage that overlaps a strictly more relevant one.
///
/// Overlap means the segment spans intersect. Overlapping passages with
/// exactly equal scores both survive.
pub fn dedup_overlaps(scored: &[ScoredPassage]) -> Vec<ScoredPassage> {
    // Sorting by span start lets each passage only look at neighbours whose
    // start lies inside its own span or whose span reaches back over it.
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by_key(|&i| scored[i].passage().start_index());
    let max_window = scored
        .iter()
        .map(|s| s.passage().window_size())
        .max()
        .unwrap_or(0);
    let mut dominated = vec![false; scored.len()];
    for (pos, &i) in order.iter().enumerate() {
        let pi = scored[i].passage();
        let lo = pi.start_index().saturating_sub(max_window);
        let start = order[..pos].partition_point(|&j| scored[j].passage().start_index() < lo);
        for &j in &order[start..] {
            let pj = scored[j].passage();
            if pj.start_index() > pi.end_index() {
                break;
            }
            if j != i && pi.overlaps(pj) && scored[j].relevance() > scored[i].relevance() {
                dominated[i] = true;
                break;
            }
        }
    }
    scored
        .iter()
        .zip(dominated)
        .filter(|(_, d)| !d)
        .map(|(s, _)| s.clone())
        .collect()
}

/// Descending relevance, then smaller start index, then smaller window.
pub fn evidence_order(a: &ScoredPassage, b: &ScoredPassage) -> Ordering {
    b.relevance()
        .total_cmp(&a.relevance())
        .then(a.passage().start_index().cmp(&b.passage().start_index()))
        .then(a.passage().window_size().cmp(&b.passage().window_size()))
}

/// Up to `k` passages, best first.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EvidenceSet {
    items: Vec<ScoredPassage>,
}

impl EvidenceSet {
    pub fn items(&self) -> &[ScoredPassage] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn relevance_sum(&self) -> f64 {
        self.items.iter().map(ScoredPassage::relevance).sum()
    }

    pub fn texts(&self) -> Vec<String> {
        self.items
            .iter()
            .map(|s| s.passage().text().to_owned())
            .collect()
    }
}

/// The `k` highest-scoring passages of `pstar`, or all of them when fewer
/// exist.
pub fn select_evidence(pstar: &[ScoredPassage], k: usize) -> EvidenceSet {
    let mut items = pstar.to_vec();
    items.sort_by(evidence_order);
    items.truncate(k);
    EvidenceSet { items }
}

/// Score, drop dominated overlaps, select.
pub fn select(
    v: &Verbalisation,
    passages: &[Passage],
    backend: &dyn Scorer,
    k: usize,
) -> Result<(Vec<ScoredPassage>, EvidenceSet), SelectionError> {
    let scored = score_passages(v, passages, backend)?;
    let pstar = dedup_overlaps(&scored);
    let evidence = select_evidence(&pstar, k);
    Ok((scored, evidence))
}

/// True when no passage clears the relevance threshold.
pub fn all_likely_irrelevant(scored: &[ScoredPassage]) -> bool {
    scored.iter().all(|s| s.relevance() <= RELEVANCE_THRESHOLD)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::BaselineScorer;
    use crate::kg::{Labels, VerbalisationOrigin};

    fn sp(text: &str, n: usize, start: usize, rho: f64) -> ScoredPassage {
        ScoredPassage::new(Passage::new(text, n, start, start + n - 1).unwrap(), rho).unwrap()
    }

    /// Pairwise filter written straight from the definition.
    fn brute_dedup(xs: &[ScoredPassage]) -> Vec<ScoredPassage> {
        xs.iter()
            .filter(|a| {
                !xs.iter()
                    .any(|b| a.passage().overlaps(b.passage()) && b.relevance() > a.relevance())
            })
            .cloned()
            .collect()
    }

    #[test]
    fn dominated_overlap_is_removed() {
        let xs = vec![sp("a b", 2, 0, 0.9), sp("a", 1, 0, 0.5)];
        assert_eq!(dedup_overlaps(&xs), vec![xs[0].clone()]);
    }

    #[test]
    fn disjoint_spans_survive() {
        let xs = vec![sp("a", 1, 0, 0.9), sp("b", 1, 1, -0.5)];
        assert_eq!(dedup_overlaps(&xs), xs);
    }

    #[test]
    fn equal_scores_both_survive() {
        let xs = vec![sp("a b", 2, 0, 0.5), sp("b", 1, 1, 0.5)];
        assert_eq!(dedup_overlaps(&xs), brute_dedup(&xs));
        assert_eq!(dedup_overlaps(&xs).len(), 2);
    }

    #[test]
    fn chain_matches_brute_force() {
        let xs = vec![
            sp("a", 1, 0, 0.1),
            sp("b", 1, 1, 0.4),
            sp("c", 1, 2, 0.3),
            sp("a b", 2, 0, 0.2),
            sp("b c", 2, 1, 0.35),
            sp("c d e", 3, 2, 0.6),
            sp("d", 1, 3, 0.6),
        ];
        assert_eq!(dedup_overlaps(&xs), brute_dedup(&xs));
    }

    #[test]
    fn top_five_of_seven() {
        let xs: Vec<_> = (0..7).map(|i| sp("x", 1, i, i as f64 / 10.0)).collect();
        let e = select_evidence(&xs, 5);
        let starts: Vec<_> = e.items().iter().map(|s| s.passage().start_index()).collect();
        assert_eq!(starts, [6, 5, 4, 3, 2]);
    }

    #[test]
    fn short_evidence_set() {
        let xs: Vec<_> = (0..3).map(|i| sp("x", 1, i, 0.1)).collect();
        assert_eq!(select_evidence(&xs, 5).len(), 3);
    }

    #[test]
    fn ties_prefer_smaller_start_then_smaller_window() {
        let xs = vec![
            sp("a", 1, 4, 0.9),
            sp("b", 1, 3, 0.9),
            sp("c d", 2, 1, 0.5),
            sp("c", 1, 1, 0.5),
            sp("e", 1, 0, 0.9),
            sp("f", 1, 7, 0.9),
        ];
        let e = select_evidence(&xs, 5);
        let got: Vec<_> = e.items().iter().map(|s| s.passage().text()).collect();
        assert_eq!(got, ["e", "b", "a", "f", "c"]);
    }

    #[test]
    fn baseline_scores_restatement_highest() {
        let v = crate::kg::Verbalisation::new(
            "Paris is the capital of France.",
            Labels::new("Paris", "capital of", "France"),
            VerbalisationOrigin::Override,
        )
        .unwrap();
        let ps = vec![
            Passage::new("Lyon is a city.", 1, 0, 0).unwrap(),
            Passage::new("Paris is the capital of France.", 1, 1, 1).unwrap(),
            Passage::new("Bananas.", 1, 2, 2).unwrap(),
        ];
        let scored = score_passages(&v, &ps, &BaselineScorer::new()).unwrap();
        assert_eq!(scored[1].relevance(), 1.0);
        assert_eq!(scored[2].relevance(), -1.0);
        // {lyon, is, a, city} vs six claim tokens: one shared, nine in the union.
        assert!((scored[0].relevance() - (2.0 / 9.0 - 1.0)).abs() < 1e-15);
        assert!(matches!(
            score_passages(&v, &[], &BaselineScorer::new()),
            Err(SelectionError::NoPassages)
        ));
    }
}
