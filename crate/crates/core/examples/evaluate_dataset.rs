//! Evaluate every aggregator on an annotated dataset and print the tables.
//!
//! Run with `cargo run --example evaluate_dataset [dataset.jsonl]`. Without
//! an argument the bundled five-record sample is used.

use std::path::PathBuf;

use prove::backend::BaselineScorer;
use prove::evaluation::{evaluate_pipeline, load_wtr, EvalConfig};

fn main() {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/wtr/five_records.jsonl")
    });
    let ds = load_wtr(&path).expect("dataset");
    println!("{} records ({} duplicates dropped)\n", ds.records.len(), ds.duplicates_dropped);

    let cfg = EvalConfig { seed: 7, ..EvalConfig::default() };
    let bundle = evaluate_pipeline(&ds.records, &cfg, &BaselineScorer);
    print!("{}", bundle.to_tables());
}
