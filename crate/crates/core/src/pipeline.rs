//! End-to-end verification of one triple against one reference.
//!
//! The stages run in order: label selection and verbalisation, text
//! extraction, relevance scoring with overlap removal, stance scoring, and
//! aggregation. [`run`] stops before aggregation so that callers such as the
//! evaluation harness can aggregate the same evidence several ways.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{BackendError, Scorer};
use crate::kg::{
    validate_triple, AggregatorKind, Evidence, KgError, Reference, ScoredPassage, Stance, Triple,
    Verbalisation, VerbalisationOrigin, VerdictReport, DISTRIBUTION_TOLERANCE,
};
use crate::retrieval::{extract, Extraction, FetchError, Fetcher, Segmenter, WindowConfig};
use crate::selection::{
    all_likely_irrelevant, select, SelectionError, EVIDENCE_SIZE,
};
use crate::verbalisation::{
    override_verbalisation, select_labels, template_verbalise, verbalise, LabelPolicy,
    VerbalisationError,
};
use crate::verification::{
    aggregate_classifier, aggregate_malon, aggregate_weighted_sum, features_from_evidence,
    pair_evidence, stance_probs, AggregateResult, StanceClassifier, VerificationError,
};

pub const REPORT_FORMAT: &str = "prove-verdict";
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error(transparent)]
    Verbalisation(#[from] VerbalisationError),
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error(transparent)]
    Verification(#[from] VerificationError),
    #[error("the classifier aggregator needs a trained model")]
    MissingModel,
}

impl PipelineError {
    /// The backend error at the root of this failure, if any.
    pub fn backend_error(&self) -> Option<&BackendError> {
        match self {
            PipelineError::Verbalisation(VerbalisationError::Backend(e))
            | PipelineError::Selection(SelectionError::Backend(e))
            | PipelineError::Verification(VerificationError::Backend(e)) => Some(e),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub windows: WindowConfig,
    pub evidence_k: usize,
    pub labels: LabelPolicy,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            windows: WindowConfig::default(),
            evidence_k: EVIDENCE_SIZE,
            labels: LabelPolicy::default(),
        }
    }
}

/// Everything computed for a triple-reference pair short of aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub verbalisation: Verbalisation,
    pub extraction: Extraction,
    /// Every passage with its relevance score, in extraction order.
    pub scored: Vec<ScoredPassage>,
    /// The selected evidence with stance, best first.
    pub evidence: Vec<Evidence>,
}

impl PipelineRun {
    pub fn all_likely_irrelevant(&self) -> bool {
        all_likely_irrelevant(&self.scored)
    }

    /// Aggregates the evidence with one strategy.
    ///
    /// With no evidence every strategy yields NEI with support 0.
    pub fn verdict(
        &self,
        kind: AggregatorKind,
        model: Option<&dyn StanceClassifier>,
    ) -> Result<VerdictReport, PipelineError> {
        if self.evidence.is_empty() {
            return Ok(VerdictReport {
                final_class: Stance::Nei,
                support_probability: 0.0,
                raw_support: (kind == AggregatorKind::WeightedSum).then_some(0.0),
                evidence: Vec::new(),
                aggregator: kind,
                aggregate_values: [0.0; 3],
            });
        }
        let sigma: Vec<_> = self.evidence.iter().map(|e| e.stance).collect();
        let (result, raw_support) = match kind {
            AggregatorKind::WeightedSum => {
                let rho: Vec<f64> = self.evidence.iter().map(Evidence::relevance).collect();
                let r = aggregate_weighted_sum(&rho, &sigma)?;
                (r, Some(r.support_probability))
            }
            AggregatorKind::Malon => (aggregate_malon(&sigma)?, None),
            AggregatorKind::Classifier => {
                let model = model.ok_or(PipelineError::MissingModel)?;
                let f = features_from_evidence(&self.evidence);
                (aggregate_classifier(&f, model)?, None)
            }
        };
        Ok(report_from(kind, result, raw_support, self.evidence.clone()))
    }
}

fn report_from(
    kind: AggregatorKind,
    r: AggregateResult,
    raw_support: Option<f64>,
    evidence: Vec<Evidence>,
) -> VerdictReport {
    let support_probability = if raw_support.is_some() {
        r.normalized_support()
    } else {
        r.support_probability
    };
    VerdictReport {
        final_class: r.final_class,
        support_probability,
        raw_support,
        evidence,
        aggregator: kind,
        aggregate_values: r.class_values,
    }
}

/// Runs every stage up to aggregation.
///
/// `claim_override` replaces the generated verbalisation. When the reference
/// yields no passages the backend is never called and the claim falls back
/// to the template verbalisation.
pub fn run(
    triple: &Triple,
    reference: &Reference,
    claim_override: Option<&str>,
    cfg: &PipelineConfig,
    backend: &dyn Scorer,
    fetcher: &Fetcher,
    segmenter: &dyn Segmenter,
) -> Result<PipelineRun, PipelineError> {
    validate_triple(triple)?;
    let labels = select_labels(triple, &cfg.labels)?;
    let extraction = extract(reference, fetcher, segmenter, &cfg.windows)?;

    let verbalisation = match claim_override {
        Some(text) => override_verbalisation(text, &labels)?,
        None if extraction.passages.is_empty() => template_verbalise(&labels)?,
        None => verbalise(&labels, backend)?,
    };
    if extraction.passages.is_empty() {
        return Ok(PipelineRun {
            verbalisation,
            extraction,
            scored: Vec::new(),
            evidence: Vec::new(),
        });
    }

    let (scored, selected) = select(&verbalisation, &extraction.passages, backend, cfg.evidence_k)?;
    let sigma = stance_probs(&verbalisation, &selected, backend)?;
    let evidence = pair_evidence(&selected, &sigma)?;
    Ok(PipelineRun {
        verbalisation,
        extraction,
        scored,
        evidence,
    })
}

/// Versioned output of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyReport {
    pub format: String,
    pub version: u32,
    pub triple_id: String,
    pub reference_id: String,
    pub claim: String,
    pub claim_origin: VerbalisationOrigin,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_url: Option<String>,
    pub segments: usize,
    pub passages: usize,
    pub all_likely_irrelevant: bool,
    pub verdicts: Vec<VerdictReport>,
}

impl VerifyReport {
    pub fn new(triple: &Triple, reference: &Reference, run: &PipelineRun, verdicts: Vec<VerdictReport>) -> Self {
        VerifyReport {
            format: REPORT_FORMAT.to_owned(),
            version: REPORT_VERSION,
            triple_id: triple.id.clone(),
            reference_id: reference.id.clone(),
            claim: run.verbalisation.text().to_owned(),
            claim_origin: run.verbalisation.origin(),
            final_url: run.extraction.final_url.clone(),
            segments: run.extraction.segments.len(),
            passages: run.extraction.passages.len(),
            all_likely_irrelevant: run.all_likely_irrelevant(),
            verdicts,
        }
    }

    /// Checks the structural contract of a report, returning every
    /// violation found.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if self.format != REPORT_FORMAT || self.version != REPORT_VERSION {
            errs.push(format!("unknown report format {} v{}", self.format, self.version));
        }
        if self.verdicts.is_empty() {
            errs.push("no verdicts".into());
        }
        for v in &self.verdicts {
            validate_verdict(v, &mut errs);
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

fn validate_verdict(v: &VerdictReport, errs: &mut Vec<String>) {
    let tag = v.aggregator.as_str();
    if !(0.0..=1.0).contains(&v.support_probability) {
        errs.push(format!("{tag}: support {} outside [0, 1]", v.support_probability));
    }
    if v.evidence.len() > EVIDENCE_SIZE {
        errs.push(format!("{tag}: {} evidence items", v.evidence.len()));
    }
    if v.evidence.windows(2).any(|w| w[0].relevance() < w[1].relevance()) {
        errs.push(format!("{tag}: evidence not in descending relevance"));
    }
    for e in &v.evidence {
        let p = e.scored.passage();
        if !(-1.0..=1.0).contains(&e.relevance())
            || p.end_index() + 1 != p.start_index() + p.window_size()
            || e.length_chars != p.char_len()
            || (e.stance.as_array().iter().sum::<f64>() - 1.0).abs() > DISTRIBUTION_TOLERANCE
        {
            errs.push(format!("{tag}: malformed evidence `{}`", p.text()));
        }
    }
    let expected = if v.aggregate_values.iter().all(|&x| x == 0.0) {
        Stance::Nei
    } else {
        Stance::argmax(v.aggregate_values)
    };
    if v.final_class != expected {
        errs.push(format!(
            "{tag}: final class {} disagrees with values {:?}",
            v.final_class, v.aggregate_values
        ));
    }
}

/// Runs the pipeline and aggregates with each requested strategy.
#[allow(clippy::too_many_arguments)]
pub fn verify(
    triple: &Triple,
    reference: &Reference,
    claim_override: Option<&str>,
    cfg: &PipelineConfig,
    backend: &dyn Scorer,
    fetcher: &Fetcher,
    segmenter: &dyn Segmenter,
    aggregators: &[AggregatorKind],
    model: Option<&dyn StanceClassifier>,
) -> Result<VerifyReport, PipelineError> {
    if aggregators.contains(&AggregatorKind::Classifier) && model.is_none() {
        return Err(PipelineError::MissingModel);
    }
    let run = run(triple, reference, claim_override, cfg, backend, fetcher, segmenter)?;
    let verdicts = aggregators
        .iter()
        .map(|&k| run.verdict(k, model))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(VerifyReport::new(triple, reference, &run, verdicts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::BaselineScorer;
    use crate::kg::{ObjectDatatype, TripleComponent};
    use crate::retrieval::RuleSegmenter;

    fn triple() -> Triple {
        Triple::new(
            "Q1-P1-Q2",
            TripleComponent::new("Q1", "Paris"),
            TripleComponent::new("P1", "country"),
            TripleComponent::new("Q2", "France"),
            ObjectDatatype::Entity,
        )
    }

    /// Panics on any call, proving the backend is never touched.
    struct Forbidden;
    impl Scorer for Forbidden {
        fn verbalise(&self, _: &crate::kg::Labels) -> Result<String, BackendError> {
            panic!("verbalise called")
        }
        fn relevance(&self, _: &str, _: &[String]) -> Result<Vec<f64>, BackendError> {
            panic!("relevance called")
        }
        fn stance(&self, _: &str, _: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
            panic!("stance called")
        }
        fn name(&self) -> &str {
            "forbidden"
        }
    }

    #[test]
    fn empty_reference_gives_nei_without_backend_calls() {
        let r = Reference::url("r", "file:///nowhere").with_fetched("file:///nowhere", "<script>x()</script>");
        let rep = verify(
            &triple(),
            &r,
            None,
            &PipelineConfig::default(),
            &Forbidden,
            &Fetcher::new(std::time::Duration::from_secs(1), true),
            &RuleSegmenter,
            &[AggregatorKind::WeightedSum, AggregatorKind::Malon],
            None,
        )
        .unwrap();
        assert_eq!(rep.passages, 0);
        for v in &rep.verdicts {
            assert_eq!((v.final_class, v.support_probability), (Stance::Nei, 0.0));
        }
        rep.validate().unwrap();
    }

    #[test]
    fn supporting_page_with_baseline() {
        let html = "<p>Paris is a city. Paris's country is France.</p><p>Bananas are yellow.</p>";
        let r = Reference::url("r", "file:///page").with_fetched("file:///page", html);
        let rep = verify(
            &triple(),
            &r,
            None,
            &PipelineConfig::default(),
            &BaselineScorer::new(),
            &Fetcher::new(std::time::Duration::from_secs(1), true),
            &RuleSegmenter,
            &[AggregatorKind::WeightedSum, AggregatorKind::Malon],
            None,
        )
        .unwrap();
        assert_eq!(rep.claim, "Paris's country is France.");
        assert_eq!(rep.claim_origin, VerbalisationOrigin::Template);
        assert_eq!(rep.verdicts[0].final_class, Stance::Supp);
        assert_eq!(rep.verdicts[0].evidence[0].text(), "Paris's country is France.");
        assert!(rep.verdicts[0].raw_support.is_some());
        rep.validate().unwrap();
    }

    #[test]
    fn classifier_without_model_is_refused() {
        let r = Reference::document("d", "Paris is in France.");
        let err = verify(
            &triple(),
            &r,
            None,
            &PipelineConfig::default(),
            &BaselineScorer::new(),
            &Fetcher::default(),
            &RuleSegmenter,
            &[AggregatorKind::Classifier],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, PipelineError::MissingModel));
    }
}
