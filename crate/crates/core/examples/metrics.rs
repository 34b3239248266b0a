//! Classification metrics, ROC AUC, Pearson correlation and Fleiss' kappa.
//!
//! Run with `cargo run --example metrics`.

use prove::evaluation::{classification_metrics, fleiss_kappa, pearson_r, roc_auc};

fn main() {
    let labels = [0, 0, 1, 2, 2, 2, 1, 0];
    let preds = [0, 1, 1, 2, 2, 0, 1, 0];
    let m = classification_metrics(&preds, &labels, &["SUPP", "REF", "NEI"]).unwrap();
    println!("accuracy {:.3}, macro F1 {:.3}, weighted F1 {:.3}", m.accuracy, m.macro_avg.f1, m.weighted_avg.f1);
    for c in &m.per_class {
        println!("  {:<4} P {:.3} R {:.3} F1 {:.3} (n={})", c.label, c.precision, c.recall, c.f1, c.support);
    }
    println!("confusion (rows are true classes): {:?}", m.confusion);

    let scores = [0.9, 0.8, 0.7, 0.3, 0.2, 0.75];
    let positive = [true, true, false, false, false, true];
    println!("AUC {:.3}", roc_auc(&scores, &positive).unwrap());

    let relevance = [0.9, 0.1, -0.4, 0.6, -0.9];
    let share_relevant = [1.0, 0.4, 0.2, 0.8, 0.0];
    println!("Pearson r {:.3}", pearson_r(&relevance, &share_relevant).unwrap());

    // Three items, five raters, counts per category.
    let counts = vec![vec![5, 0, 0], vec![3, 1, 1], vec![0, 1, 4]];
    println!("Fleiss' kappa {:.3}", fleiss_kappa(&counts).unwrap());
}
