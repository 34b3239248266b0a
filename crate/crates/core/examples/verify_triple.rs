//! Verify one triple against one page, entirely offline.
//!
//! Run with `cargo run --example verify_triple`.

use prove::backend::BaselineScorer;
use prove::kg::{AggregatorKind, ObjectDatatype, Reference, Triple, TripleComponent};
use prove::pipeline::{verify, PipelineConfig};
use prove::retrieval::{Fetcher, RuleSegmenter};

const PAGE: &str = r#"
<html><body>
<nav><a href="/">Home</a> | <a href="/about">About</a></nav>
<h1>Marie Curie</h1>
<p>Marie Curie was born in Warsaw in 1867. She moved to Paris in 1891.</p>
<p>Her country of citizenship was France after her marriage. She was not a citizen of Germany.</p>
<footer>Copyright notice</footer>
</body></html>
"#;

fn main() {
    let triple = Triple::new(
        "Q7186-P27-Q142",
        TripleComponent::new("Q7186", "Marie Curie"),
        TripleComponent::new("P27", "country of citizenship"),
        TripleComponent::new("Q142", "France"),
        ObjectDatatype::Entity,
    );
    let url = "https://example.org/curie";
    let page = Reference::url("ref-1", url).with_fetched(url, PAGE);

    let report = verify(
        &triple,
        &page,
        None,
        &PipelineConfig::default(),
        &BaselineScorer::new(),
        &Fetcher::new(std::time::Duration::from_secs(5), true),
        &RuleSegmenter,
        &[AggregatorKind::WeightedSum, AggregatorKind::Malon],
        None,
    )
    .expect("verification");

    println!("claim: {}", report.claim);
    println!("{} segments, {} passages", report.segments, report.passages);
    for v in &report.verdicts {
        println!(
            "{:<12} -> {} (support {:.3})",
            v.aggregator.as_str(),
            v.final_class.as_str(),
            v.support_probability
        );
    }
    for e in &report.verdicts[0].evidence {
        println!("  rho {:+.3}  {:?}  {}", e.relevance(), e.stance.argmax(), e.text());
    }
}
