//! Training and cross-validating the classifier aggregator.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::forest::{argmax, ForestParams, RandomForest};
use super::{FeatureVector, StanceClassifier, VerificationError, FEATURE_LEN, SLOT_WIDTH};
use crate::evaluation::metrics::{classification_metrics, roc_auc, MetricsReport};
use crate::kg::Stance;

pub const MODEL_FORMAT: &str = "prove-aggregation-model";
pub const MODEL_VERSION: u32 = 1;

pub const TERNARY_CLASSES: [&str; 3] = ["SUPP", "REF", "NEI"];
pub const BINARY_CLASSES: [&str; 2] = ["supporting", "not_supporting"];

/// Names of the 25 classifier inputs, slot by slot.
pub fn feature_names() -> Vec<String> {
    const PARTS: [&str; SLOT_WIDTH] = ["relevance", "supp", "ref", "nei", "length"];
    (1..=FEATURE_LEN / SLOT_WIDTH)
        .flat_map(|slot| PARTS.iter().map(move |p| format!("e{slot}_{p}")))
        .collect()
}

/// Trained classifier aggregator together with its feature schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AggregationModel {
    pub format: String,
    pub version: u32,
    pub features: Vec<String>,
    pub classes: Vec<Stance>,
    pub forest: RandomForest,
}

impl AggregationModel {
    pub fn new(forest: RandomForest) -> Self {
        AggregationModel {
            format: MODEL_FORMAT.to_owned(),
            version: MODEL_VERSION,
            features: feature_names(),
            classes: Stance::ALL.to_vec(),
            forest,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, VerificationError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let m: AggregationModel = serde_path_to_error::deserialize(de)
            .map_err(|e| VerificationError::ModelFormat(format!("{}: {}", e.path(), e.inner())))?;
        let bad = |msg: String| Err(VerificationError::ModelFormat(msg));
        if m.format != MODEL_FORMAT {
            return bad(format!("unknown format `{}`", m.format));
        }
        if m.version != MODEL_VERSION {
            return bad(format!("unsupported version {}", m.version));
        }
        if m.features != feature_names() || m.forest.n_features != m.features.len() {
            return Err(VerificationError::SchemaMismatch {
                expected: FEATURE_LEN,
                got: m.forest.n_features,
            });
        }
        if m.classes != Stance::ALL || m.forest.n_classes != 3 {
            return bad("classes must be SUPP, REF, NEI".into());
        }
        m.forest.check().map_err(VerificationError::ModelFormat)?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<(), VerificationError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, VerificationError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl StanceClassifier for AggregationModel {
    fn feature_len(&self) -> Option<usize> {
        self.forest.feature_len()
    }

    fn predict_proba(&self, features: &[f64]) -> Vec<f64> {
        self.forest.predict_proba(features)
    }
}

/// Shuffles `0..n` with a seeded generator and cuts it into `k` folds whose
/// sizes differ by at most one. Each fold is sorted.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, VerificationError> {
    if k < 2 || k > n {
        return Err(VerificationError::InvalidFolds { n, folds: k });
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        let mut fold = idx[start..start + len].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += len;
    }
    Ok(folds)
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(fold as u64 + 1)
}

/// Out-of-fold class probabilities for every sample, in input order.
pub fn cross_val_predict(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    folds: &[Vec<usize>],
    params: &ForestParams,
    seed: u64,
) -> Result<Vec<Vec<f64>>, VerificationError> {
    let mut out = vec![Vec::new(); x.len()];
    for (f, test) in folds.iter().enumerate() {
        let mut in_test = vec![false; x.len()];
        test.iter().for_each(|&i| in_test[i] = true);
        let train: Vec<usize> = (0..x.len()).filter(|&i| !in_test[i]).collect();
        let tx: Vec<Vec<f64>> = train.iter().map(|&i| x[i].clone()).collect();
        let ty: Vec<usize> = train.iter().map(|&i| y[i]).collect();
        let forest = RandomForest::fit(&tx, &ty, n_classes, params, fold_seed(seed, f))?;
        for &i in test {
            out[i] = forest.predict_proba(&x[i]);
        }
    }
    Ok(out)
}

/// Metrics averaged over folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    /// Mean over folds where AUC is defined; binary task only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auc: Option<f64>,
}

impl MeanMetrics {
    pub fn of(reports: &[MetricsReport]) -> Self {
        let n = reports.len() as f64;
        let mean = |f: &dyn Fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        let aucs: Vec<f64> = reports.iter().filter_map(|r| r.auc).collect();
        MeanMetrics {
            accuracy: mean(&|r| r.accuracy),
            macro_precision: mean(&|r| r.macro_avg.precision),
            macro_recall: mean(&|r| r.macro_avg.recall),
            macro_f1: mean(&|r| r.macro_avg.f1),
            weighted_precision: mean(&|r| r.weighted_avg.precision),
            weighted_recall: mean(&|r| r.weighted_avg.recall),
            weighted_f1: mean(&|r| r.weighted_avg.f1),
            auc: (!aucs.is_empty()).then(|| aucs.iter().sum::<f64>() / aucs.len() as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub per_fold: Vec<MetricsReport>,
    pub mean: MeanMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValReport {
    pub folds: usize,
    pub seed: u64,
    pub n_samples: usize,
    pub params: ForestParams,
    pub ternary: TaskReport,
    /// SUPP against everything else, with its own forest per fold.
    pub binary: TaskReport,
}

fn task_report(
    probs: &[Vec<f64>],
    y: &[usize],
    folds: &[Vec<usize>],
    classes: &[&str],
) -> Result<TaskReport, VerificationError> {
    let mut per_fold = Vec::with_capacity(folds.len());
    for test in folds {
        let preds: Vec<usize> = test.iter().map(|&i| argmax(&probs[i])).collect();
        let labels: Vec<usize> = test.iter().map(|&i| y[i]).collect();
        let mut m = classification_metrics(&preds, &labels, classes)
            .map_err(|e| VerificationError::ModelFormat(e.to_string()))?;
        if classes.len() == 2 {
            let scores: Vec<f64> = test.iter().map(|&i| probs[i][0]).collect();
            let positive: Vec<bool> = labels.iter().map(|&l| l == 0).collect();
            m.auc = roc_auc(&scores, &positive).ok();
        }
        per_fold.push(m);
    }
    let mean = MeanMetrics::of(&per_fold);
    Ok(TaskReport { per_fold, mean })
}

/// Cross-validates a forest on `dataset` and fits the final model on all of
/// it.
///
/// The ternary and binary tasks share the fold partition. The returned
/// model is the ternary one.
pub fn train_aggregation_model(
    dataset: &[(FeatureVector, Stance)],
    folds: usize,
    seed: u64,
    params: &ForestParams,
) -> Result<(AggregationModel, CrossValReport), VerificationError> {
    let mut present = [false; 3];
    dataset.iter().for_each(|(_, k)| present[k.index()] = true);
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(VerificationError::SingleClassDataset);
    }
    if let Some(i) = present.iter().position(|p| !p) {
        return Err(VerificationError::MissingClass(Stance::ALL[i]));
    }
    let partition = kfold_indices(dataset.len(), folds, seed)?;

    let x: Vec<Vec<f64>> = dataset.iter().map(|(f, _)| f.values().to_vec()).collect();
    let y3: Vec<usize> = dataset.iter().map(|(_, k)| k.index()).collect();
    let y2: Vec<usize> = y3.iter().map(|&k| usize::from(k != 0)).collect();

    let p3 = cross_val_predict(&x, &y3, 3, &partition, params, seed)?;
    let p2 = cross_val_predict(&x, &y2, 2, &partition, params, seed)?;
    let report = CrossValReport {
        folds,
        seed,
        n_samples: dataset.len(),
        params: params.clone(),
        ternary: task_report(&p3, &y3, &partition, &TERNARY_CLASSES)?,
        binary: task_report(&p2, &y2, &partition, &BINARY_CLASSES)?,
    };
    let forest = RandomForest::fit(&x, &y3, 3, params, seed)?;
    Ok((AggregationModel::new(forest), report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> Vec<(FeatureVector, Stance)> {
        (0..n)
            .map(|i| {
                let mut f = FeatureVector::default();
                let v = i as f64 / n as f64;
                f.0[1] = v;
                let k = if v > 0.66 {
                    Stance::Supp
                } else if v > 0.33 {
                    Stance::Ref
                } else {
                    Stance::Nei
                };
                (f, k)
            })
            .collect()
    }

    fn small() -> ForestParams {
        ForestParams {
            n_trees: 10,
            ..ForestParams::default()
        }
    }

    #[test]
    fn folds_partition_the_indices() {
        let folds = kfold_indices(23, 5, 3).unwrap();
        let sizes: Vec<_> = folds.iter().map(Vec::len).collect();
        assert_eq!(sizes, [5, 5, 5, 4, 4]);
        let mut all: Vec<usize> = folds.concat();
        all.sort();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        assert!(kfold_indices(3, 5, 0).is_err());
        assert!(kfold_indices(10, 1, 0).is_err());
    }

    #[test]
    fn single_class_is_rejected() {
        let data: Vec<_> = toy(30).into_iter().map(|(f, _)| (f, Stance::Nei)).collect();
        assert!(matches!(
            train_aggregation_model(&data, 5, 0, &small()),
            Err(VerificationError::SingleClassDataset)
        ));
    }

    #[test]
    fn learns_a_threshold_rule() {
        let (model, report) = train_aggregation_model(&toy(90), 5, 11, &small()).unwrap();
        assert!(report.ternary.mean.accuracy > 0.9, "{:?}", report.ternary.mean);
        assert!(report.binary.mean.auc.unwrap() > 0.9);
        assert_eq!(report.ternary.per_fold.len(), 5);
        let mut f = FeatureVector::default();
        f.0[1] = 0.95;
        assert_eq!(model.forest.predict(f.values()), 0);
    }

    #[test]
    fn model_file_round_trips() {
        let (model, _) = train_aggregation_model(&toy(40), 4, 2, &small()).unwrap();
        let text = model.to_json();
        let back = AggregationModel::from_json(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn model_file_errors_name_the_field() {
        let (model, _) = train_aggregation_model(&toy(40), 4, 2, &small()).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&model.to_json()).unwrap();
        v["forest"]["trees"][0]["nodes"][0]["kind"] = "branch".into();
        let err = AggregationModel::from_json(&v.to_string()).unwrap_err().to_string();
        assert!(err.contains("forest.trees[0].nodes[0]"), "{err}");

        let mut v: serde_json::Value = serde_json::from_str(&model.to_json()).unwrap();
        v["version"] = 99.into();
        assert!(AggregationModel::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn feature_names_cover_every_slot() {
        let names = feature_names();
        assert_eq!(names.len(), FEATURE_LEN);
        assert_eq!(names[0], "e1_relevance");
        assert_eq!(names[24], "e5_length");
    }
}
