//! Scoring backends for verbalisation, passage relevance and stance.
//!
//! A backend is anything implementing [`Scorer`]. Two implementations ship:
//! [`BaselineScorer`], a deterministic in-process heuristic used for hermetic
//! runs, and [`RemoteScorer`], an HTTP client for a model server speaking the
//! JSON protocol in [`protocol`]. The `call_*` functions wrap a scorer and
//! enforce the output contract, so a misbehaving backend surfaces as
//! [`BackendError::Protocol`] regardless of where it runs.

mod baseline;
pub mod protocol;
mod remote;

use std::time::Duration;

use thiserror::Error;

use crate::kg::{Labels, StanceDistribution};

pub use baseline::{tokens, BaselineScorer, NEGATION_TOKENS};
pub use remote::RemoteScorer;

/// Maximum number of items sent in one relevance or stance request.
pub const MAX_BATCH: usize = 64;

/// Environment variable naming the remote backend endpoint.
pub const BACKEND_URL_ENV: &str = "PROVE_BACKEND_URL";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("backend timed out after {0} ms")]
    Timeout(u64),
    #[error("backend protocol error: {0}")]
    Protocol(String),
    #[error("network access to {0} refused in offline mode")]
    Offline(String),
    #[error("invalid backend configuration: {0}")]
    Config(String),
}

impl BackendError {
    /// Errors after which the verbaliser falls back to the template.
    pub fn is_unavailability(&self) -> bool {
        matches!(
            self,
            BackendError::Unavailable(_) | BackendError::Timeout(_) | BackendError::Offline(_)
        )
    }
}

/// A source of the three model functions the pipeline needs.
///
/// Implementations return raw outputs; use the `call_*` functions to get
/// validated ones.
pub trait Scorer: Send + Sync {
    fn verbalise(&self, labels: &Labels) -> Result<String, BackendError>;

    fn relevance(&self, claim: &str, passages: &[String]) -> Result<Vec<f64>, BackendError>;

    fn stance(&self, claim: &str, evidence: &[String]) -> Result<Vec<Vec<f64>>, BackendError>;

    fn name(&self) -> &str;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendKind {
    Remote { endpoint: String },
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub timeout_ms: u64,
    pub max_in_flight: usize,
    pub offline: bool,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            kind: BackendKind::Baseline,
            timeout_ms: 30_000,
            max_in_flight: 4,
            offline: false,
        }
    }
}

impl BackendConfig {
    pub fn remote(endpoint: impl Into<String>) -> Self {
        BackendConfig {
            kind: BackendKind::Remote {
                endpoint: endpoint.into(),
            },
            ..Default::default()
        }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if self.timeout_ms == 0 {
            return Err(BackendError::Config("timeout_ms must be positive".into()));
        }
        if self.max_in_flight == 0 {
            return Err(BackendError::Config("max_in_flight must be at least 1".into()));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Box<dyn Scorer>, BackendError> {
        self.validate()?;
        match &self.kind {
            BackendKind::Baseline => Ok(Box::new(BaselineScorer::new())),
            BackendKind::Remote { endpoint } => {
                if self.offline {
                    return Err(BackendError::Offline(endpoint.clone()));
                }
                Ok(Box::new(RemoteScorer::new(
                    endpoint,
                    self.timeout(),
                    self.max_in_flight,
                )?))
            }
        }
    }
}

pub fn call_verbalise(b: &dyn Scorer, labels: &Labels) -> Result<String, BackendError> {
    let text = b.verbalise(labels)?;
    if text.trim().is_empty() {
        return Err(BackendError::Protocol("empty verbalisation".into()));
    }
    Ok(text)
}

pub fn call_relevance(
    b: &dyn Scorer,
    claim: &str,
    passages: &[String],
) -> Result<Vec<f64>, BackendError> {
    if passages.is_empty() {
        return Ok(Vec::new());
    }
    let scores = b.relevance(claim, passages)?;
    if scores.len() != passages.len() {
        return Err(BackendError::Protocol(format!(
            "expected {} relevance scores, got {}",
            passages.len(),
            scores.len()
        )));
    }
    if let Some(bad) = scores.iter().find(|s| !(-1.0..=1.0).contains(*s)) {
        return Err(BackendError::Protocol(format!(
            "relevance score {bad} outside [-1, 1]"
        )));
    }
    Ok(scores)
}

pub fn call_stance(
    b: &dyn Scorer,
    claim: &str,
    evidence: &[String],
) -> Result<Vec<StanceDistribution>, BackendError> {
    if evidence.is_empty() {
        return Ok(Vec::new());
    }
    let rows = b.stance(claim, evidence)?;
    if rows.len() != evidence.len() {
        return Err(BackendError::Protocol(format!(
            "expected {} stance distributions, got {}",
            evidence.len(),
            rows.len()
        )));
    }
    rows.into_iter()
        .map(|row| {
            if row.len() != 3 {
                return Err(BackendError::Protocol(format!(
                    "stance row has {} entries, expected 3",
                    row.len()
                )));
            }
            StanceDistribution::new(row[0], row[1], row[2])
                .map_err(|e| BackendError::Protocol(e.to_string()))
        })
        .collect()
}
