//! CART decision trees (Gini impurity) bagged into a random forest.
//!
//! Each tree draws its bootstrap sample and per-split feature subsets from
//! its own ChaCha stream, keyed by the forest seed and the tree index. Trees
//! are therefore independent of fitting order, and parallel fitting yields
//! the same forest as sequential fitting.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{StanceClassifier, VerificationError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Features considered per split; `None` means floor(sqrt(n_features)).
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
    /// Threads used for fitting. Does not affect the result.
    #[serde(skip, default = "one")]
    pub n_jobs: usize,
}

fn one() -> usize {
    1
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: 8,
            max_features: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            bootstrap: true,
            n_jobs: 1,
        }
    }
}

impl ForestParams {
    pub fn features_per_split(&self, n_features: usize) -> usize {
        self.max_features
            .unwrap_or_else(|| (n_features as f64).sqrt().floor() as usize)
            .clamp(1, n_features.max(1))
    }

    fn validate(&self) -> Result<(), VerificationError> {
        let bad = |m: &str| Err(VerificationError::ModelFormat(m.to_owned()));
        if self.n_trees == 0 {
            return bad("n_trees must be positive");
        }
        if self.min_samples_leaf == 0 || self.min_samples_split < 2 {
            return bad("min_samples_leaf must be >= 1 and min_samples_split >= 2");
        }
        if self.max_features == Some(0) {
            return bad("max_features must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Node {
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        distribution: Vec<f64>,
    },
}

/// A tree stored as a flat node list with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { distribution } => return distribution,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &DecisionTree, i: usize) -> usize {
            match &t.nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
            }
        }
        go(self, 0)
    }

    /// Structural check used when loading a model file: indices in range,
    /// every node reached exactly once from the root, leaves sized for
    /// `n_classes`.
    pub fn check(&self, n_features: usize, n_classes: usize) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err("tree has no nodes".into());
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            let slot = seen.get_mut(i).ok_or(format!("node index {i} out of range"))?;
            if *slot {
                return Err(format!("node {i} is reachable twice"));
            }
            *slot = true;
            match &self.nodes[i] {
                Node::Leaf { distribution } => {
                    if distribution.len() != n_classes {
                        return Err(format!("leaf {i} has {} classes", distribution.len()));
                    }
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if *feature >= n_features || !threshold.is_finite() {
                        return Err(format!("node {i} has an invalid split"));
                    }
                    stack.push(*right);
                    stack.push(*left);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err("tree has unreachable nodes".into());
        }
        Ok(())
    }
}

/// Soft-voting ensemble of CART trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomForest {
    pub n_features: usize,
    pub n_classes: usize,
    pub seed: u64,
    pub params: ForestParams,
    pub trees: Vec<DecisionTree>,
}

impl RandomForest {
    /// Fits a forest on rows `x` with class indices `y < n_classes`.
    pub fn fit(
        x: &[Vec<f64>],
        y: &[usize],
        n_classes: usize,
        params: &ForestParams,
        seed: u64,
    ) -> Result<Self, VerificationError> {
        params.validate()?;
        if x.is_empty() {
            return Err(VerificationError::LengthMismatch { expected: 1, got: 0 });
        }
        if x.len() != y.len() {
            return Err(VerificationError::LengthMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        let n_features = x[0].len();
        if let Some(row) = x.iter().find(|r| r.len() != n_features) {
            return Err(VerificationError::SchemaMismatch {
                expected: n_features,
                got: row.len(),
            });
        }
        if let Some(&c) = y.iter().find(|&&c| c >= n_classes) {
            return Err(VerificationError::ModelFormat(format!(
                "label {c} outside {n_classes} classes"
            )));
        }

        let data = Data { x, y, n_classes };
        let fit_one = |t: usize| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            TreeBuilder::new(&data, params, &mut rng).build()
        };
        let jobs = params.n_jobs.clamp(1, params.n_trees);
        let trees = if jobs == 1 {
            (0..params.n_trees).map(fit_one).collect()
        } else {
            let chunk = params.n_trees.div_ceil(jobs);
            std::thread::scope(|s| {
                let handles: Vec<_> = (0..params.n_trees)
                    .step_by(chunk)
                    .map(|lo| {
                        let hi = (lo + chunk).min(params.n_trees);
                        s.spawn(move || (lo..hi).map(fit_one).collect::<Vec<_>>())
                    })
                    .collect();
                handles
                    .into_iter()
                    .flat_map(|h| h.join().expect("tree fitting panicked"))
                    .collect()
            })
        };

        Ok(RandomForest {
            n_features,
            n_classes,
            seed,
            params: ForestParams {
                n_jobs: 1,
                ..params.clone()
            },
            trees,
        })
    }

    /// Mean of the trees' leaf distributions.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_classes];
        for t in &self.trees {
            for (o, p) in out.iter_mut().zip(t.predict(x)) {
                *o += p;
            }
        }
        let n = self.trees.len() as f64;
        out.iter_mut().for_each(|o| *o /= n);
        out
    }

    /// Most probable class, lowest index on ties.
    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.predict_proba(x))
    }

    pub fn check(&self) -> Result<(), String> {
        if self.trees.is_empty() {
            return Err("forest has no trees".into());
        }
        self.trees
            .iter()
            .enumerate()
            .try_for_each(|(i, t)| {
                t.check(self.n_features, self.n_classes)
                    .map_err(|e| format!("tree {i}: {e}"))
            })
    }
}

impl StanceClassifier for RandomForest {
    fn feature_len(&self) -> Option<usize> {
        (!self.trees.is_empty()).then_some(self.n_features)
    }

    fn predict_proba(&self, features: &[f64]) -> Vec<f64> {
        RandomForest::predict_proba(self, features)
    }
}

pub(crate) fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate().skip(1) {
        if v > p[best] {
            best = i;
        }
    }
    best
}

struct Data<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
}

struct TreeBuilder<'a, 'r> {
    data: &'a Data<'a>,
    params: &'a ForestParams,
    rng: &'r mut ChaCha8Rng,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    cost: f64,
}

impl<'a, 'r> TreeBuilder<'a, 'r> {
    fn new(data: &'a Data<'a>, params: &'a ForestParams, rng: &'r mut ChaCha8Rng) -> Self {
        TreeBuilder {
            data,
            params,
            rng,
            nodes: Vec::new(),
        }
    }

    fn build(mut self) -> DecisionTree {
        let n = self.data.x.len();
        let samples: Vec<usize> = if self.params.bootstrap {
            (0..n).map(|_| self.rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        self.grow(samples, 0);
        DecisionTree { nodes: self.nodes }
    }

    fn counts(&self, samples: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.data.n_classes];
        for &i in samples {
            c[self.data.y[i]] += 1;
        }
        c
    }

    fn leaf(&mut self, counts: &[usize]) -> usize {
        let total: usize = counts.iter().sum();
        let distribution = counts.iter().map(|&c| c as f64 / total as f64).collect();
        self.nodes.push(Node::Leaf { distribution });
        self.nodes.len() - 1
    }

    fn grow(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&samples);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.params.max_depth || samples.len() < self.params.min_samples_split {
            return self.leaf(&counts);
        }
        let Some(best) = self.best_split(&samples) else {
            return self.leaf(&counts);
        };
        let (left, right): (Vec<usize>, Vec<usize>) = samples
            .iter()
            .partition(|&&i| self.data.x[i][best.feature] <= best.threshold);

        let me = self.nodes.len();
        self.nodes.push(Node::Leaf {
            distribution: Vec::new(),
        });
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[me] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: l,
            right: r,
        };
        me
    }

    /// Tries `max_features` random features; if none of them can split the
    /// node, keeps drawing from the remaining features until one can.
    fn best_split(&mut self, samples: &[usize]) -> Option<BestSplit> {
        let n_features = self.data.x[0].len();
        let order = sample(self.rng, n_features, n_features).into_vec();
        let wanted = self.params.features_per_split(n_features);
        let mut best: Option<BestSplit> = None;
        for (tried, &f) in order.iter().enumerate() {
            if tried >= wanted && best.is_some() {
                break;
            }
            if let Some(s) = self.split_on(samples, f) {
                if best.as_ref().is_none_or(|b| s.cost < b.cost) {
                    best = Some(s);
                }
            }
        }
        best
    }

    /// Lowest weighted Gini split on one feature, as n * impurity.
    fn split_on(&self, samples: &[usize], f: usize) -> Option<BestSplit> {
        let x = self.data.x;
        let mut sorted: Vec<(f64, usize)> =
            samples.iter().map(|&i| (x[i][f], self.data.y[i])).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let n = sorted.len();
        let min_leaf = self.params.min_samples_leaf;
        let mut right = vec![0usize; self.data.n_classes];
        for &(_, c) in &sorted {
            right[c] += 1;
        }
        let mut left = vec![0usize; self.data.n_classes];
        let mut best: Option<BestSplit> = None;
        for i in 0..n - 1 {
            let c = sorted[i].1;
            left[c] += 1;
            right[c] -= 1;
            let (nl, nr) = (i + 1, n - i - 1);
            if nl < min_leaf || nr < min_leaf || sorted[i].0 == sorted[i + 1].0 {
                continue;
            }
            let cost = weighted_gini(&left, nl) + weighted_gini(&right, nr);
            if best.as_ref().is_none_or(|b| cost < b.cost) {
                let (lo, hi) = (sorted[i].0, sorted[i + 1].0);
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some(BestSplit {
                    feature: f,
                    threshold,
                    cost,
                });
            }
        }
        best
    }
}

/// n * Gini(counts) = n - sum(c^2) / n.
fn weighted_gini(counts: &[usize], n: usize) -> f64 {
    let sq: usize = counts.iter().map(|c| c * c).sum();
    n as f64 - sq as f64 / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor_data() -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let a = (i % 2) as f64;
            let b = ((i / 2) % 2) as f64;
            x.push(vec![a, b, (i % 7) as f64]);
            y.push((a as usize) ^ (b as usize));
        }
        (x, y)
    }

    #[test]
    fn single_tree_fits_xor() {
        let (x, y) = xor_data();
        let p = ForestParams {
            n_trees: 1,
            bootstrap: false,
            max_features: Some(3),
            ..ForestParams::default()
        };
        let f = RandomForest::fit(&x, &y, 2, &p, 1).unwrap();
        for (row, &label) in x.iter().zip(&y) {
            assert_eq!(f.predict(row), label);
        }
        f.check().unwrap();
    }

    #[test]
    fn probabilities_sum_to_one() {
        let (x, y) = xor_data();
        let f = RandomForest::fit(&x, &y, 3, &ForestParams::default(), 9).unwrap();
        for row in &x {
            let p = f.predict_proba(row);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(p[2], 0.0);
        }
    }

    #[test]
    fn depth_limit_is_respected() {
        let x: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64]).collect();
        let y: Vec<usize> = (0..64).map(|i| i % 2).collect();
        let p = ForestParams {
            n_trees: 3,
            max_depth: 3,
            ..ForestParams::default()
        };
        let f = RandomForest::fit(&x, &y, 2, &p, 0).unwrap();
        assert!(f.trees.iter().all(|t| t.depth() <= 3));
    }

    #[test]
    fn parallel_fit_matches_sequential() {
        let (x, y) = xor_data();
        let seq = RandomForest::fit(&x, &y, 2, &ForestParams::default(), 5).unwrap();
        let par = RandomForest::fit(
            &x,
            &y,
            2,
            &ForestParams {
                n_jobs: 4,
                ..ForestParams::default()
            },
            5,
        )
        .unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn constant_features_give_a_single_leaf() {
        let x = vec![vec![1.0, 1.0]; 6];
        let y = vec![0, 1, 0, 1, 0, 1];
        let p = ForestParams {
            n_trees: 1,
            bootstrap: false,
            ..ForestParams::default()
        };
        let f = RandomForest::fit(&x, &y, 2, &p, 0).unwrap();
        assert_eq!(f.trees[0].nodes.len(), 1);
        assert_eq!(f.predict_proba(&[1.0, 1.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn check_rejects_broken_trees() {
        let t = DecisionTree {
            nodes: vec![Node::Split {
                feature: 0,
                threshold: 0.5,
                left: 1,
                right: 1,
            }],
        };
        assert!(t.check(1, 2).is_err());
    }
}
