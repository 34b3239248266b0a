use std::collections::HashSet;
use std::sync::OnceLock;

use super::{BackendError, Scorer};
use crate::kg::Labels;

const NEGATIONS_FILE: &str = include_str!("../../data/negations.txt");

/// Tokens treated as negation cues by the baseline stance heuristic.
pub static NEGATION_TOKENS: OnceLock<HashSet<&'static str>> = OnceLock::new();

fn negations() -> &'static HashSet<&'static str> {
    NEGATION_TOKENS.get_or_init(|| {
        NEGATIONS_FILE
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

/// Lowercased word tokens: runs of alphanumerics, keeping inner apostrophes.
pub fn tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let normalized = text.replace(['\u{2019}', '\u{2018}'], "'");
    for c in normalized.chars() {
        if c.is_alphanumeric() || c == '\'' {
            cur.extend(c.to_lowercase());
        } else if !cur.is_empty() {
            push_token(&mut out, &mut cur);
        }
    }
    if !cur.is_empty() {
        push_token(&mut out, &mut cur);
    }
    out
}

fn push_token(out: &mut Vec<String>, cur: &mut String) {
    let t = cur.trim_matches('\'');
    if !t.is_empty() {
        out.push(t.to_owned());
    }
    cur.clear();
}

fn token_set(text: &str) -> HashSet<String> {
    tokens(text).into_iter().collect()
}

fn jaccard(a: &HashSet<String>, b: &HashSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

fn softmax(logits: [f64; 3]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Deterministic lexical stand-in for the model server.
///
/// Relevance is `2 * jaccard - 1` over lowercased token sets. Stance is a
/// softmax over `(c * (1 - neg), c * neg, 1 - c)` where `c` is the share of
/// claim tokens found in the evidence and `neg` is 1 when the evidence holds
/// a negation cue. It has no verbaliser, so verbalisation falls back to the
/// template. None of these numbers say anything about real model quality.
#[derive(Debug, Default, Clone, Copy)]
pub struct BaselineScorer;

impl BaselineScorer {
    pub fn new() -> Self {
        BaselineScorer
    }

    pub fn relevance_score(claim: &str, passage: &str) -> f64 {
        2.0 * jaccard(&token_set(claim), &token_set(passage)) - 1.0
    }

    pub fn claim_coverage(claim: &str, evidence: &str) -> f64 {
        let c = token_set(claim);
        if c.is_empty() {
            return 0.0;
        }
        let e = token_set(evidence);
        c.intersection(&e).count() as f64 / c.len() as f64
    }

    pub fn has_negation(text: &str) -> bool {
        let neg = negations();
        tokens(text).iter().any(|t| neg.contains(t.as_str()))
    }

    pub fn stance_row(claim: &str, evidence: &str) -> Vec<f64> {
        let c = Self::claim_coverage(claim, evidence);
        let neg = if Self::has_negation(evidence) { 1.0 } else { 0.0 };
        softmax([c * (1.0 - neg), c * neg, 1.0 - c])
    }
}

impl Scorer for BaselineScorer {
    fn verbalise(&self, _labels: &Labels) -> Result<String, BackendError> {
        Err(BackendError::Unavailable(
            "baseline backend has no verbaliser".into(),
        ))
    }

    fn relevance(&self, claim: &str, passages: &[String]) -> Result<Vec<f64>, BackendError> {
        Ok(passages
            .iter()
            .map(|p| Self::relevance_score(claim, p))
            .collect())
    }

    fn stance(&self, claim: &str, evidence: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        Ok(evidence
            .iter()
            .map(|e| Self::stance_row(claim, e))
            .collect())
    }

    fn name(&self) -> &str {
        "baseline"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{call_relevance, call_stance};
    use crate::kg::Stance;

    fn strings(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn tokenizer_lowercases_and_keeps_contractions() {
        assert_eq!(
            tokens("James H. Billington isn't here, 1987–2015!"),
            vec!["james", "h", "billington", "isn't", "here", "1987", "2015"]
        );
        assert_eq!(tokens("  "), Vec::<String>::new());
    }

    #[test]
    fn identical_text_scores_one_and_disjoint_scores_minus_one() {
        let b = BaselineScorer::new();
        let s = call_relevance(&b, "a b c", &strings(&["a b c", "x y"])).unwrap();
        assert_eq!(s, vec![1.0, -1.0]);
    }

    #[test]
    fn relevance_is_case_insensitive() {
        assert_eq!(
            BaselineScorer::relevance_score("Paris is big", "PARIS IS BIG"),
            1.0
        );
    }

    #[test]
    fn jaccard_of_one_third() {
        // {a,b} vs {b,c}: intersection 1, union 3.
        let s = BaselineScorer::relevance_score("a b", "b c");
        assert!((s - (2.0 / 3.0 - 1.0)).abs() < 1e-15);
        assert!((s + 0.333_333_333_333_333).abs() < 1e-12);
    }

    #[test]
    fn stance_heuristic_classes() {
        let b = BaselineScorer::new();
        let claim = "Paris is the capital of France.";
        let rows = call_stance(
            &b,
            claim,
            &strings(&[
                "Paris is the capital of France.",
                "Paris is not the capital of France.",
                "Bananas grow on plants.",
            ]),
        )
        .unwrap();
        assert_eq!(rows[0].argmax(), Stance::Supp);
        assert_eq!(rows[1].argmax(), Stance::Ref);
        assert_eq!(rows[2].argmax(), Stance::Nei);
        for r in rows {
            assert!((r.supp() + r.refute() + r.nei() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn baseline_has_no_verbaliser() {
        let err = BaselineScorer::new()
            .verbalise(&Labels::new("a", "b", "c"))
            .unwrap_err();
        assert!(err.is_unavailability());
    }
}
