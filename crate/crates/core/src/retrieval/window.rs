use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::segment::SegmentList;
use crate::kg::Passage;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WindowConfigError {
    #[error("at least one window size is required")]
    Empty,
    #[error("window sizes must be positive")]
    Zero,
    #[error("cannot parse window size `{0}`")]
    Parse(String),
}

/// The set of sliding-window sizes applied to a segment list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct WindowConfig {
    sizes: BTreeSet<usize>,
}

impl Default for WindowConfig {
    /// Single segments and adjacent pairs.
    fn default() -> Self {
        WindowConfig {
            sizes: BTreeSet::from([1, 2]),
        }
    }
}

impl WindowConfig {
    pub fn new<I: IntoIterator<Item = usize>>(sizes: I) -> Result<Self, WindowConfigError> {
        let sizes: BTreeSet<usize> = sizes.into_iter().collect();
        if sizes.is_empty() {
            return Err(WindowConfigError::Empty);
        }
        if sizes.contains(&0) {
            return Err(WindowConfigError::Zero);
        }
        Ok(WindowConfig { sizes })
    }

    /// Parses a comma-separated list such as `1,2`.
    pub fn parse(s: &str) -> Result<Self, WindowConfigError> {
        let sizes = s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.parse::<usize>()
                    .map_err(|_| WindowConfigError::Parse(p.to_owned()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(sizes)
    }

    pub fn sizes(&self) -> impl Iterator<Item = usize> + '_ {
        self.sizes.iter().copied()
    }
}

impl TryFrom<Vec<usize>> for WindowConfig {
    type Error = WindowConfigError;

    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        WindowConfig::new(v)
    }
}

impl From<WindowConfig> for Vec<usize> {
    fn from(c: WindowConfig) -> Self {
        c.sizes.into_iter().collect()
    }
}

/// All windows of each configured size, ordered by size then start index.
///
/// A size larger than the segment count contributes nothing. Passages with
/// identical text but different spans are all kept.
pub fn window(segments: &SegmentList, cfg: &WindowConfig) -> Vec<Passage> {
    let s = segments.as_slice();
    cfg.sizes()
        .flat_map(|n| {
            (0..(s.len() + 1).saturating_sub(n)).filter_map(move |i| Passage::from_segments(s, i, n))
        })
        .collect()
}
