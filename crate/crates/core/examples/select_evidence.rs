//! Score passages against a claim, drop dominated overlaps and keep the
//! five best.
//!
//! Run with `cargo run --example select_evidence`.

use prove::backend::BaselineScorer;
use prove::kg::Labels;
use prove::retrieval::{segment, window, WindowConfig};
use prove::selection::{all_likely_irrelevant, select};
use prove::verbalisation::template_verbalise;

fn main() {
    let claim = template_verbalise(&Labels::new("Oslo", "country", "Norway")).unwrap();
    let text = "Oslo is the capital of Norway. The city lies at the head of a fjord. \
                Oslo's country is Norway. Winters are cold. Norway has five million people.";
    let passages = window(&segment(text), &WindowConfig::default());

    let (scored, evidence) = select(&claim, &passages, &BaselineScorer, 5).unwrap();
    println!("claim: {}", claim.text());
    println!("{} passages scored", scored.len());
    println!("all likely irrelevant: {}", all_likely_irrelevant(&scored));
    for (rank, e) in evidence.items().iter().enumerate() {
        let p = e.passage();
        println!(
            "#{} rho {:+.3} n={} start={} {}",
            rank + 1,
            e.relevance(),
            p.window_size(),
            p.start_index(),
            p.text()
        );
    }
}
