//! The three ways of turning per-evidence stances into one verdict.
//!
//! Run with `cargo run --example aggregate_stances`.

use prove::kg::{Evidence, Passage, ScoredPassage, StanceDistribution};
use prove::verification::{
    aggregate_classifier, aggregate_malon, aggregate_weighted_sum, features_from_evidence,
    train_aggregation_model, ForestParams,
};

fn evidence(rho: f64, s: f64, r: f64, n: f64, start: usize) -> Evidence {
    let p = Passage::new(format!("passage {start}"), 1, start, start).unwrap();
    Evidence::new(ScoredPassage::new(p, rho).unwrap(), StanceDistribution::new(s, r, n).unwrap())
}

fn main() {
    let ev = vec![
        evidence(0.5, 0.8, 0.1, 0.1, 0),
        evidence(-0.2, 0.1, 0.8, 0.1, 1),
        evidence(0.1, 0.2, 0.2, 0.6, 2),
    ];
    let rho: Vec<f64> = ev.iter().map(Evidence::relevance).collect();
    let sigma: Vec<StanceDistribution> = ev.iter().map(|e| e.stance).collect();

    let ws = aggregate_weighted_sum(&rho, &sigma).unwrap();
    println!("weighted sum: {:?} -> {:?}, y = {:.3}", ws.class_values, ws.final_class, ws.support_probability);

    let m = aggregate_malon(&sigma).unwrap();
    println!("malon:        {:?} -> {:?}, y = {}", m.class_values, m.final_class, m.support_probability);

    // A toy classifier trained on two hand-made patterns.
    let supp = features_from_evidence(&[evidence(0.9, 0.9, 0.05, 0.05, 0)]);
    let refute = features_from_evidence(&[evidence(0.9, 0.05, 0.9, 0.05, 0)]);
    let nei = features_from_evidence(&[evidence(0.2, 0.1, 0.1, 0.8, 0)]);
    let mut data = Vec::new();
    for _ in 0..5 {
        data.push((supp, prove::kg::Stance::Supp));
        data.push((refute, prove::kg::Stance::Ref));
        data.push((nei, prove::kg::Stance::Nei));
    }
    let params = ForestParams { n_trees: 10, ..ForestParams::default() };
    let (model, _) = train_aggregation_model(&data, 3, 0, &params).unwrap();
    let c = aggregate_classifier(&features_from_evidence(&ev), &model).unwrap();
    println!("classifier:   {:?} -> {:?}, y = {:.3}", c.class_values, c.final_class, c.support_probability);
}
