//! Train the random-forest aggregator on labelled feature vectors,
//! inspect the cross-validation report and round-trip the model file.
//!
//! Run with `cargo run --release --example train_classifier`.

use prove::kg::{Evidence, Passage, ScoredPassage, Stance, StanceDistribution};
use prove::verification::{
    features_from_evidence, train_aggregation_model, AggregationModel, FeatureVector,
    ForestParams, StanceClassifier,
};
use rand::{Rng, SeedableRng};

/// Labels follow the stance of the most relevant evidence.
fn dataset(n: usize) -> Vec<(FeatureVector, Stance)> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
    (0..n)
        .map(|_| {
            let k = rng.random_range(1..=5);
            let ev: Vec<Evidence> = (0..k)
                .map(|i| {
                    let a: f64 = rng.random();
                    let b: f64 = rng.random::<f64>() * (1.0 - a);
                    let p = Passage::new("text", 1, i, i).unwrap();
                    let s = StanceDistribution::new(a, b, 1.0 - a - b).unwrap();
                    Evidence::new(ScoredPassage::new(p, rng.random_range(-1.0..=1.0)).unwrap(), s)
                })
                .collect();
            let f = features_from_evidence(&ev);
            let top = [f.values()[1], f.values()[2], f.values()[3]];
            (f, Stance::argmax(top))
        })
        .collect()
}

fn main() {
    let data = dataset(300);
    let params = ForestParams { n_jobs: 4, ..ForestParams::default() };
    let (model, report) = train_aggregation_model(&data, 5, 7, &params).unwrap();

    println!("ternary accuracy per fold:");
    for (i, m) in report.ternary.per_fold.iter().enumerate() {
        println!("  fold {i}: {:.3}", m.accuracy);
    }
    println!("mean ternary accuracy {:.3}, macro F1 {:.3}", report.ternary.mean.accuracy, report.ternary.mean.macro_f1);
    println!("mean binary accuracy  {:.3}", report.binary.mean.accuracy);

    let path = std::env::temp_dir().join("prove-example-model.json");
    model.save(&path).unwrap();
    let loaded = AggregationModel::load(&path).unwrap();
    assert_eq!(loaded, model);
    let theta = loaded.predict_proba(data[0].0.values());
    println!("model saved to {}; first sample -> {theta:.3?}", path.display());
}
