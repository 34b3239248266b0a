//! Classification and correlation metrics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("predictions ({0}) and labels ({1}) differ in length")]
    LengthMismatch(usize, usize),
    #[error("no samples")]
    Empty,
    #[error("class index {0} is out of range")]
    UnknownClass(usize),
    #[error("ROC AUC needs both positive and negative labels")]
    SingleClassLabels,
    #[error("correlation needs at least two points")]
    TooShort,
    #[error("correlation is undefined for a constant series")]
    ZeroVariance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: usize,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    /// Rows are true classes, columns predicted classes.
    pub confusion: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pearson_r: Option<f64>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Accuracy, per-class precision/recall/F1, macro and support-weighted
/// averages and the confusion matrix.
///
/// Precision of a class that is never predicted is 0, as is F1 when both
/// precision and recall are 0. Macro averages run over every class in
/// `classes`, including ones absent from the labels.
pub fn classification_metrics(
    preds: &[usize],
    labels: &[usize],
    classes: &[&str],
) -> Result<MetricsReport, MetricsError> {
    if preds.len() != labels.len() {
        return Err(MetricsError::LengthMismatch(preds.len(), labels.len()));
    }
    if preds.is_empty() {
        return Err(MetricsError::Empty);
    }
    let k = classes.len();
    let mut confusion = vec![vec![0usize; k]; k];
    for (&p, &t) in preds.iter().zip(labels) {
        if p >= k {
            return Err(MetricsError::UnknownClass(p));
        }
        if t >= k {
            return Err(MetricsError::UnknownClass(t));
        }
        confusion[t][p] += 1;
    }
    let n = preds.len();
    let correct: usize = (0..k).map(|c| confusion[c][c]).sum();

    let mut per_class = Vec::with_capacity(k);
    for (c, name) in classes.iter().enumerate() {
        let tp = confusion[c][c];
        let support: usize = confusion[c].iter().sum();
        let predicted: usize = confusion.iter().map(|row| row[c]).sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        per_class.push(ClassMetrics {
            label: (*name).to_owned(),
            precision,
            recall,
            f1: f1(precision, recall),
            support,
        });
    }

    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / k as f64;
    let weighted = |f: fn(&ClassMetrics) -> f64| {
        per_class
            .iter()
            .map(|m| m.support as f64 * f(m))
            .sum::<f64>()
            / n as f64
    };
    let macro_avg = Averages {
        precision: mean(|m| m.precision),
        recall: mean(|m| m.recall),
        f1: mean(|m| m.f1),
    };
    // Support-weighted recall is sum(tp) / n; computing it that way keeps it
    // bit-identical to accuracy.
    let weighted_avg = Averages {
        precision: weighted(|m| m.precision),
        recall: ratio(correct, n),
        f1: weighted(|m| m.f1),
    };

    Ok(MetricsReport {
        n,
        accuracy: ratio(correct, n),
        per_class,
        macro_avg,
        weighted_avg,
        confusion,
        auc: None,
        pearson_r: None,
    })
}

/// Probability that a random positive outranks a random negative, counting
/// ties as one half. Computed from average ranks in O(n log n).
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch(scores.len(), labels.len()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricsError::SingleClassLabels);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks are 1-based; the tied block i..=j shares their mean
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            if labels[idx] {
                pos_rank_sum += avg_rank;
            }
        }
        i = j + 1;
    }
    let np = n_pos as f64;
    Ok((pos_rank_sum - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

/// Pearson product-moment correlation.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<f64, MetricsError> {
    if xs.len() != ys.len() {
        return Err(MetricsError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(MetricsError::TooShort);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Fleiss' kappa over per-item category counts.
///
/// Items may have different rater counts; items with fewer than two ratings
/// are ignored. Returns `None` when agreement is undefined (no usable items,
/// or all ratings in one category).
pub fn fleiss_kappa(counts: &[Vec<usize>]) -> Option<f64> {
    let items: Vec<&Vec<usize>> = counts
        .iter()
        .filter(|c| c.iter().sum::<usize>() >= 2)
        .collect();
    if items.is_empty() {
        return None;
    }
    let k = items.iter().map(|c| c.len()).max()?;
    let mut totals = vec![0.0; k];
    let mut total_ratings = 0.0;
    let mut p_bar = 0.0;
    for c in &items {
        let n_i: usize = c.iter().sum();
        let agree: usize = c.iter().map(|&x| x * x.saturating_sub(1)).sum();
        p_bar += agree as f64 / (n_i * (n_i - 1)) as f64;
        for (j, &x) in c.iter().enumerate() {
            totals[j] += x as f64;
        }
        total_ratings += n_i as f64;
    }
    p_bar /= items.len() as f64;
    let p_e: f64 = totals.iter().map(|t| (t / total_ratings).powi(2)).sum();
    if (1.0 - p_e).abs() < f64::EPSILON {
        return None;
    }
    Some((p_bar - p_e) / (1.0 - p_e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ABC: [&str; 3] = ["a", "b", "c"];

    #[test]
    fn perfect_predictions() {
        let y = [0, 1, 2, 1, 0];
        let m = classification_metrics(&y, &y, &ABC).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert!(m.per_class.iter().all(|c| c.f1 == 1.0));
        assert_eq!(m.macro_avg.f1, 1.0);
    }

    #[test]
    fn constant_prediction_on_balanced_labels() {
        let labels = [0, 0, 1, 1, 2, 2];
        let preds = [2; 6];
        let m = classification_metrics(&preds, &labels, &ABC).unwrap();
        assert!((m.accuracy - 1.0 / 3.0).abs() < 1e-15);
        // class c: precision 1/3, recall 1, F1 1/2; others 0.
        assert!((m.macro_avg.f1 - 0.5 / 3.0).abs() < 1e-15);
        assert_eq!(m.per_class[0].precision, 0.0);
        assert_eq!(m.confusion[0], vec![0, 0, 2]);
    }

    #[test]
    fn weighted_recall_is_accuracy() {
        let labels = [0, 0, 0, 1, 2, 2, 1];
        let preds = [0, 1, 2, 1, 2, 0, 0];
        let m = classification_metrics(&preds, &labels, &ABC).unwrap();
        assert_eq!(m.weighted_avg.recall, m.accuracy);
    }

    #[test]
    fn mismatched_lengths() {
        assert_eq!(
            classification_metrics(&[0], &[0, 1], &ABC).unwrap_err(),
            MetricsError::LengthMismatch(1, 2)
        );
        assert_eq!(
            classification_metrics(&[], &[], &ABC).unwrap_err(),
            MetricsError::Empty
        );
        assert_eq!(
            classification_metrics(&[3], &[0], &ABC).unwrap_err(),
            MetricsError::UnknownClass(3)
        );
    }

    #[test]
    fn auc_edge_cases() {
        assert_eq!(roc_auc(&[0.9, 0.1], &[true, false]).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0.1, 0.9], &[true, false]).unwrap(), 0.0);
        assert_eq!(roc_auc(&[0.5; 4], &[true, false, true, false]).unwrap(), 0.5);
        assert_eq!(
            roc_auc(&[0.5, 0.4], &[true, true]).unwrap_err(),
            MetricsError::SingleClassLabels
        );
    }

    #[test]
    fn pearson_exact_lines() {
        let xs = [1.0, 2.0, 3.0, 4.5];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((pearson_r(&xs, &ys).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson_r(&xs, &neg).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(
            pearson_r(&xs, &[1.0; 4]).unwrap_err(),
            MetricsError::ZeroVariance
        );
        assert_eq!(pearson_r(&[1.0], &[1.0]).unwrap_err(), MetricsError::TooShort);
    }

    #[test]
    fn fleiss_kappa_reference_values() {
        // Full agreement on varied categories.
        let k = fleiss_kappa(&[vec![5, 0, 0], vec![0, 5, 0], vec![0, 0, 5]]).unwrap();
        assert!((k - 1.0).abs() < 1e-12);
        // Two items, two raters each, opposite splits: P_i = 0, p_e = 1/2.
        let k = fleiss_kappa(&[vec![1, 1], vec![1, 1]]).unwrap();
        assert!((k + 1.0).abs() < 1e-12);
        assert!(fleiss_kappa(&[vec![3, 0]]).is_none());
    }
}
