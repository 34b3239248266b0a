//! Per-evidence stance scoring and the three verdict aggregators.

mod forest;
mod training;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{call_stance, BackendError, Scorer};
use crate::kg::{Evidence, KgError, Stance, StanceDistribution, Verbalisation, DISTRIBUTION_TOLERANCE};
use crate::selection::{evidence_order, EvidenceSet, EVIDENCE_SIZE};

pub use forest::{DecisionTree, ForestParams, Node, RandomForest};
pub use training::{
    cross_val_predict, feature_names, kfold_indices, train_aggregation_model, AggregationModel,
    CrossValReport, MeanMetrics, TaskReport, BINARY_CLASSES, MODEL_FORMAT, MODEL_VERSION,
    TERNARY_CLASSES,
};

/// Values per evidence slot: relevance, three stance probabilities, length.
pub const SLOT_WIDTH: usize = 5;
/// Length of a feature vector.
pub const FEATURE_LEN: usize = EVIDENCE_SIZE * SLOT_WIDTH;
/// Evidence lengths are capped here before normalisation.
pub const LENGTH_CAP: usize = 2000;

#[derive(Debug, Error)]
pub enum VerificationError {
    #[error("no evidence to score")]
    EmptyEvidence,
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("model expects {expected} features, input has {got}")]
    SchemaMismatch { expected: usize, got: usize },
    #[error("model has not been trained")]
    NotTrained,
    #[error("training data contains a single class")]
    SingleClassDataset,
    #[error("training data has no {0} examples")]
    MissingClass(Stance),
    #[error("cannot split {n} samples into {folds} folds")]
    InvalidFolds { n: usize, folds: usize },
    #[error("classifier output is not a distribution: {0:?}")]
    InvalidPrediction(Vec<f64>),
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Kg(#[from] KgError),
}

/// Classifier input: five evidence slots in descending relevance, each
/// holding (ρ, σ^SUPP, σ^REF, σ^NEI, capped length / 2000). Unused slots are
/// zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(pub [f64; FEATURE_LEN]);

impl FeatureVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn slot(&self, i: usize) -> &[f64] {
        &self.0[i * SLOT_WIDTH..(i + 1) * SLOT_WIDTH]
    }
}

impl Default for FeatureVector {
    fn default() -> Self {
        FeatureVector([0.0; FEATURE_LEN])
    }
}

/// `min(len, 2000) / 2000`.
pub fn normalized_length(chars: usize) -> f64 {
    chars.min(LENGTH_CAP) as f64 / LENGTH_CAP as f64
}

/// Builds the feature vector from evidence paired with stance.
///
/// Input order does not matter: slots are filled in the canonical evidence
/// order. Evidence beyond the fifth slot is ignored.
pub fn features_from_evidence(evidence: &[Evidence]) -> FeatureVector {
    let mut sorted: Vec<&Evidence> = evidence.iter().collect();
    sorted.sort_by(|a, b| evidence_order(&a.scored, &b.scored));
    let mut f = FeatureVector::default();
    for (slot, e) in sorted.into_iter().take(EVIDENCE_SIZE).enumerate() {
        let s = e.stance.as_array();
        f.0[slot * SLOT_WIDTH..(slot + 1) * SLOT_WIDTH].copy_from_slice(&[
            e.relevance(),
            s[0],
            s[1],
            s[2],
            normalized_length(e.length_chars),
        ]);
    }
    f
}

/// Features for an evidence set and its stance distributions.
pub fn build_features(
    e: &EvidenceSet,
    sigma: &[StanceDistribution],
) -> Result<FeatureVector, VerificationError> {
    Ok(features_from_evidence(&pair_evidence(e, sigma)?))
}

/// Zips evidence with stance distributions.
pub fn pair_evidence(
    e: &EvidenceSet,
    sigma: &[StanceDistribution],
) -> Result<Vec<Evidence>, VerificationError> {
    if e.len() != sigma.len() {
        return Err(VerificationError::LengthMismatch {
            expected: e.len(),
            got: sigma.len(),
        });
    }
    Ok(e.items()
        .iter()
        .zip(sigma)
        .map(|(s, d)| Evidence::new(s.clone(), *d))
        .collect())
}

/// Stance distribution for each evidence passage.
pub fn stance_probs(
    v: &Verbalisation,
    e: &EvidenceSet,
    backend: &dyn Scorer,
) -> Result<Vec<StanceDistribution>, VerificationError> {
    if e.is_empty() {
        return Err(VerificationError::EmptyEvidence);
    }
    Ok(call_stance(backend, v.text(), &e.texts())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    /// Per-class values in SUPP, REF, NEI order.
    pub class_values: [f64; 3],
    pub final_class: Stance,
    pub support_probability: f64,
}

impl AggregateResult {
    /// Support share of the class values, or 0 when they are all zero.
    pub fn normalized_support(&self) -> f64 {
        let total: f64 = self.class_values.iter().sum();
        if total > 0.0 {
            self.class_values[0] / total
        } else {
            0.0
        }
    }
}

/// σ^k = Σ max(ρ_i, 0) σ_i^k; the verdict is the argmax and y = σ^SUPP.
///
/// When every weight clamps to zero the verdict is NEI with y = 0.
pub fn aggregate_weighted_sum(
    rho: &[f64],
    sigma: &[StanceDistribution],
) -> Result<AggregateResult, VerificationError> {
    if rho.len() != sigma.len() {
        return Err(VerificationError::LengthMismatch {
            expected: rho.len(),
            got: sigma.len(),
        });
    }
    let mut values = [0.0; 3];
    for (r, s) in rho.iter().zip(sigma) {
        let w = r.max(0.0);
        for (v, p) in values.iter_mut().zip(s.as_array()) {
            *v += w * p;
        }
    }
    let final_class = if values.iter().all(|&v| v == 0.0) {
        Stance::Nei
    } else {
        Stance::argmax(values)
    };
    Ok(AggregateResult {
        class_values: values,
        final_class,
        support_probability: values[0],
    })
}

/// SUPP if any evidence's argmax is SUPP, else REF if any is REF, else NEI.
///
/// Class values are 0/1 indicators of each class appearing among the
/// per-evidence argmaxes, so the tie-break argmax over them reproduces the
/// rule.
pub fn aggregate_malon(sigma: &[StanceDistribution]) -> Result<AggregateResult, VerificationError> {
    if sigma.is_empty() {
        return Err(VerificationError::EmptyEvidence);
    }
    let mut values = [0.0; 3];
    for s in sigma {
        values[s.argmax().index()] = 1.0;
    }
    let final_class = Stance::argmax(values);
    Ok(AggregateResult {
        class_values: values,
        final_class,
        support_probability: if final_class == Stance::Supp { 1.0 } else { 0.0 },
    })
}

/// Anything that maps a feature vector to class probabilities.
pub trait StanceClassifier {
    /// Number of features the model was trained on, or `None` if untrained.
    fn feature_len(&self) -> Option<usize>;
    fn predict_proba(&self, features: &[f64]) -> Vec<f64>;
}

/// θ = model(features); the verdict is argmax θ and y = θ^SUPP.
pub fn aggregate_classifier(
    f: &FeatureVector,
    model: &dyn StanceClassifier,
) -> Result<AggregateResult, VerificationError> {
    let expected = model.feature_len().ok_or(VerificationError::NotTrained)?;
    if expected != FEATURE_LEN {
        return Err(VerificationError::SchemaMismatch {
            expected,
            got: FEATURE_LEN,
        });
    }
    let theta = model.predict_proba(f.values());
    let valid = theta.len() == 3
        && theta.iter().all(|p| (0.0..=1.0).contains(p))
        && (theta.iter().sum::<f64>() - 1.0).abs() <= DISTRIBUTION_TOLERANCE;
    if !valid {
        return Err(VerificationError::InvalidPrediction(theta));
    }
    let values = [theta[0], theta[1], theta[2]];
    Ok(AggregateResult {
        class_values: values,
        final_class: Stance::argmax(values),
        support_probability: values[0],
    })
}
