//! Plug in a scorer of your own. Anything implementing `Scorer` can drive
//! the pipeline; its outputs are checked against the same contract as the
//! HTTP backend.
//!
//! Run with `cargo run --example custom_scorer`.

use prove::backend::{BackendError, Scorer};
use prove::kg::{AggregatorKind, Labels, ObjectDatatype, Reference, Triple, TripleComponent};
use prove::pipeline::{verify, PipelineConfig};
use prove::retrieval::{Fetcher, RuleSegmenter};

/// Rates a passage by which of the subject and object it names, and calls
/// it supporting when it names the subject.
struct KeywordScorer {
    subject: String,
    object: String,
}

impl Scorer for KeywordScorer {
    fn verbalise(&self, l: &Labels) -> Result<String, BackendError> {
        Ok(format!("{} has {} {}.", l.subject, l.predicate, l.object))
    }

    fn relevance(&self, _claim: &str, passages: &[String]) -> Result<Vec<f64>, BackendError> {
        Ok(passages
            .iter()
            .map(|p| match (p.contains(&self.subject), p.contains(&self.object)) {
                (true, true) => 0.9,
                (false, true) => 0.3,
                _ => -0.5,
            })
            .collect())
    }

    fn stance(&self, _claim: &str, evidence: &[String]) -> Result<Vec<Vec<f64>>, BackendError> {
        Ok(evidence
            .iter()
            .map(|e| if e.contains(&self.subject) { vec![0.8, 0.1, 0.1] } else { vec![0.2, 0.2, 0.6] })
            .collect())
    }

    fn name(&self) -> &str {
        "keyword"
    }
}

fn main() {
    let triple = Triple::new(
        "t",
        TripleComponent::new("Q1", "Lake Baikal"),
        TripleComponent::new("P2", "maximum depth"),
        TripleComponent::new("1642 metre", "1642 metre"),
        ObjectDatatype::Quantity,
    );
    let doc = Reference::document(
        "d",
        "Lake Baikal is the deepest lake in the world. Its maximum depth is 1642 metre. It lies in Siberia.",
    );
    let scorer = KeywordScorer { subject: "Baikal".into(), object: "1642".into() };
    let report = verify(
        &triple,
        &doc,
        None,
        &PipelineConfig::default(),
        &scorer,
        &Fetcher::default(),
        &RuleSegmenter,
        &AggregatorKind::ALL[..2],
        None,
    )
    .unwrap();
    println!("{}", serde_json::to_string_pretty(&report.verdicts[0]).unwrap());
}
