//! Command-line configuration.
//!
//! Settings come from three layers: a `key = value` file, command-line
//! flags, and environment variables, each overriding the one before.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::backend::{BackendConfig, BackendKind, BACKEND_URL_ENV};
use crate::kg::AggregatorKind;
use crate::retrieval::WindowConfig;
use crate::selection::EVIDENCE_SIZE;
use crate::verification::ForestParams;

pub const OFFLINE_ENV: &str = "PROVE_OFFLINE";
pub const MODEL_ENV: &str = "PROVE_MODEL";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("config line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {message}")]
    Value {
        key: String,
        value: String,
        message: String,
    },
    #[error("reading config: {0}")]
    Io(String),
}

/// Which aggregators a run reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregatorChoice {
    One(AggregatorKind),
    All,
}

impl AggregatorChoice {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "all" => AggregatorChoice::All,
            "weighted_sum" | "weighted-sum" => AggregatorChoice::One(AggregatorKind::WeightedSum),
            "malon" => AggregatorChoice::One(AggregatorKind::Malon),
            "classifier" => AggregatorChoice::One(AggregatorKind::Classifier),
            _ => return None,
        })
    }

    pub fn kinds(self) -> Vec<AggregatorKind> {
        match self {
            AggregatorChoice::All => AggregatorKind::ALL.to_vec(),
            AggregatorChoice::One(k) => vec![k],
        }
    }
}

/// One layer of settings; unset fields defer to lower layers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    /// A URL, or `baseline` for the built-in heuristic scorer.
    pub backend_url: Option<String>,
    pub timeout_ms: Option<u64>,
    pub max_in_flight: Option<usize>,
    pub windows: Option<WindowConfig>,
    pub evidence_k: Option<usize>,
    pub aggregator: Option<AggregatorChoice>,
    pub model: Option<PathBuf>,
    pub label_overrides: Option<PathBuf>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub jobs: Option<usize>,
    pub trees: Option<usize>,
    pub max_depth: Option<usize>,
    pub max_features: Option<usize>,
    pub offline: Option<bool>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::Value {
        key: key.to_owned(),
        value: value.to_owned(),
        message: e.to_string(),
    })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(ConfigError::Value {
            key: key.to_owned(),
            value: value.to_owned(),
            message: "expected true or false".into(),
        }),
    }
}

impl ConfigLayer {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "backend_url" => self.backend_url = Some(value.to_owned()),
            "timeout_ms" => self.timeout_ms = Some(parse_value(key, value)?),
            "max_in_flight" => self.max_in_flight = Some(parse_value(key, value)?),
            "windows" => {
                self.windows = Some(WindowConfig::parse(value).map_err(|e| ConfigError::Value {
                    key: key.into(),
                    value: value.into(),
                    message: e.to_string(),
                })?)
            }
            "evidence_k" => self.evidence_k = Some(parse_value(key, value)?),
            "aggregator" => {
                self.aggregator =
                    Some(AggregatorChoice::parse(value).ok_or_else(|| ConfigError::Value {
                        key: key.into(),
                        value: value.into(),
                        message: "expected weighted_sum, malon, classifier or all".into(),
                    })?)
            }
            "model" => self.model = Some(PathBuf::from(value)),
            "label_overrides" => self.label_overrides = Some(PathBuf::from(value)),
            "seed" => self.seed = Some(parse_value(key, value)?),
            "folds" => self.folds = Some(parse_value(key, value)?),
            "jobs" => self.jobs = Some(parse_value(key, value)?),
            "trees" => self.trees = Some(parse_value(key, value)?),
            "max_depth" => self.max_depth = Some(parse_value(key, value)?),
            "max_features" => self.max_features = Some(parse_value(key, value)?),
            "offline" => self.offline = Some(parse_bool(key, value)?),
            _ => return Err(ConfigError::UnknownKey(key.to_owned())),
        }
        Ok(())
    }

    /// Parses `key = value` lines. `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut layer = ConfigLayer::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                message: "expected `key = value`".into(),
            })?;
            layer.set(k.trim(), v)?;
        }
        Ok(layer)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Reads the recognised environment variables through `get`.
    pub fn from_env(get: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let mut layer = ConfigLayer::default();
        if let Some(v) = get(BACKEND_URL_ENV).filter(|v| !v.trim().is_empty()) {
            layer.set("backend_url", &v)?;
        }
        if let Some(v) = get(OFFLINE_ENV).filter(|v| !v.trim().is_empty()) {
            layer.set("offline", &v)?;
        }
        if let Some(v) = get(MODEL_ENV).filter(|v| !v.trim().is_empty()) {
            layer.set("model", &v)?;
        }
        Ok(layer)
    }

    /// `other`'s set fields win.
    pub fn overlay(self, other: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            backend_url: other.backend_url.or(self.backend_url),
            timeout_ms: other.timeout_ms.or(self.timeout_ms),
            max_in_flight: other.max_in_flight.or(self.max_in_flight),
            windows: other.windows.or(self.windows),
            evidence_k: other.evidence_k.or(self.evidence_k),
            aggregator: other.aggregator.or(self.aggregator),
            model: other.model.or(self.model),
            label_overrides: other.label_overrides.or(self.label_overrides),
            seed: other.seed.or(self.seed),
            folds: other.folds.or(self.folds),
            jobs: other.jobs.or(self.jobs),
            trees: other.trees.or(self.trees),
            max_depth: other.max_depth.or(self.max_depth),
            max_features: other.max_features.or(self.max_features),
            offline: other.offline.or(self.offline),
        }
    }

    pub fn resolve(self) -> Result<CliConfig, ConfigError> {
        let d = CliConfig::default();
        let cfg = CliConfig {
            backend_url: self
                .backend_url
                .filter(|u| !u.trim().is_empty() && u != "baseline"),
            timeout_ms: self.timeout_ms.unwrap_or(d.timeout_ms),
            max_in_flight: self.max_in_flight.unwrap_or(d.max_in_flight),
            windows: self.windows.unwrap_or(d.windows),
            evidence_k: self.evidence_k.unwrap_or(d.evidence_k),
            aggregator: self.aggregator.unwrap_or(d.aggregator),
            model: self.model,
            label_overrides: self.label_overrides,
            seed: self.seed.unwrap_or(d.seed),
            folds: self.folds.unwrap_or(d.folds),
            jobs: self.jobs.unwrap_or(d.jobs),
            forest: ForestParams {
                n_trees: self.trees.unwrap_or(d.forest.n_trees),
                max_depth: self.max_depth.unwrap_or(d.forest.max_depth),
                max_features: self.max_features.or(d.forest.max_features),
                ..d.forest
            },
            offline: self.offline.unwrap_or(d.offline),
        };
        let positive = |key: &str, v: usize| {
            if v == 0 {
                Err(ConfigError::Value {
                    key: key.into(),
                    value: "0".into(),
                    message: "must be positive".into(),
                })
            } else {
                Ok(())
            }
        };
        positive("evidence_k", cfg.evidence_k)?;
        positive("jobs", cfg.jobs)?;
        positive("max_in_flight", cfg.max_in_flight)?;
        positive("trees", cfg.forest.n_trees)?;
        if cfg.timeout_ms == 0 {
            positive("timeout_ms", 0)?;
        }
        Ok(cfg)
    }
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub backend_url: Option<String>,
    pub timeout_ms: u64,
    pub max_in_flight: usize,
    pub windows: WindowConfig,
    pub evidence_k: usize,
    pub aggregator: AggregatorChoice,
    pub model: Option<PathBuf>,
    pub label_overrides: Option<PathBuf>,
    pub seed: u64,
    pub folds: usize,
    pub jobs: usize,
    pub forest: ForestParams,
    pub offline: bool,
}

impl Default for CliConfig {
    /// Windows {1, 2}, five evidence passages, classifier aggregation.
    fn default() -> Self {
        CliConfig {
            backend_url: None,
            timeout_ms: 30_000,
            max_in_flight: 4,
            windows: WindowConfig::default(),
            evidence_k: EVIDENCE_SIZE,
            aggregator: AggregatorChoice::One(AggregatorKind::Classifier),
            model: None,
            label_overrides: None,
            seed: 0,
            folds: 5,
            jobs: 1,
            forest: ForestParams::default(),
            offline: false,
        }
    }
}

impl CliConfig {
    pub fn backend(&self) -> BackendConfig {
        BackendConfig {
            kind: match &self.backend_url {
                Some(url) => BackendKind::Remote {
                    endpoint: url.clone(),
                },
                None => BackendKind::Baseline,
            },
            timeout_ms: self.timeout_ms,
            max_in_flight: self.max_in_flight,
            offline: self.offline,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_the_reference_configuration() {
        let c = ConfigLayer::default().resolve().unwrap();
        assert_eq!(c.windows, WindowConfig::default());
        assert_eq!(c.evidence_k, 5);
        assert_eq!(c.aggregator, AggregatorChoice::One(AggregatorKind::Classifier));
        assert_eq!(c.backend().kind, BackendKind::Baseline);
    }

    #[test]
    fn file_then_flags_then_env() {
        let file = ConfigLayer::parse(
            "# comment\nbackend_url = http://file/\nseed = 1\nwindows = 1\naggregator = malon\n",
        )
        .unwrap();
        let mut flags = ConfigLayer::default();
        flags.set("seed", "2").unwrap();
        flags.set("backend_url", "http://flag/").unwrap();
        let env = ConfigLayer::from_env(|k| (k == BACKEND_URL_ENV).then(|| "http://env/".into())).unwrap();
        let c = file.overlay(flags).overlay(env).resolve().unwrap();
        assert_eq!(c.backend_url.as_deref(), Some("http://env/"));
        assert_eq!(c.seed, 2);
        assert_eq!(c.windows, WindowConfig::new([1]).unwrap());
        assert_eq!(c.aggregator, AggregatorChoice::One(AggregatorKind::Malon));
    }

    #[test]
    fn bad_input_is_reported() {
        assert_eq!(
            ConfigLayer::parse("colour = red"),
            Err(ConfigError::UnknownKey("colour".into()))
        );
        assert!(matches!(
            ConfigLayer::parse("seed"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            ConfigLayer::parse("offline = maybe"),
            Err(ConfigError::Value { .. })
        ));
        assert!(ConfigLayer::parse("jobs = 0").unwrap().resolve().is_err());
    }

    #[test]
    fn baseline_keyword_selects_the_heuristic_backend() {
        let c = ConfigLayer::parse("backend_url = baseline").unwrap().resolve().unwrap();
        assert_eq!(c.backend_url, None);
    }
}
