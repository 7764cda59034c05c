//! Gradient-boosted regression trees on logistic loss (first-order only:
//! each leaf predicts the mean residual of its rows).

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::linear::sigmoid;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Fraction of rows drawn (without replacement) for each tree.
    pub subsample: f64,
    pub min_samples_leaf: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            n_trees: 100,
            max_depth: 3,
            learning_rate: 0.1,
            subsample: 1.0,
            min_samples_leaf: 1,
        }
    }
}

impl GbtParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 || self.max_depth == 0 || self.min_samples_leaf == 0 {
            return Err(invalid("gbt n_trees, max_depth and min_samples_leaf must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid("gbt learning rate must be positive"));
        }
        if !(self.subsample > 0.0 && self.subsample <= 1.0) {
            return Err(invalid("gbt subsample must be in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Regression tree stored as a flat node list rooted at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

struct Builder<'a> {
    rows: &'a [Vec<f64>],
    target: &'a [f64],
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn mean(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.target[i]).sum::<f64>() / idx.len() as f64
    }

    /// Best `(feature, threshold)` by squared-error reduction. Zero-gain splits
    /// are allowed on impure nodes so interactions can be reached.
    fn best_split(&self, idx: &[usize]) -> Option<(usize, f64)> {
        let n = idx.len();
        if n < 2 * self.min_leaf {
            return None;
        }
        let first = self.target[idx[0]];
        if idx.iter().all(|&i| self.target[i] == first) {
            return None;
        }
        let total: f64 = idx.iter().map(|&i| self.target[i]).sum();
        let base = total * total / n as f64;
        let d = self.rows[idx[0]].len();
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = idx.to_vec();
        for f in 0..d {
            order.sort_by(|&a, &b| self.rows[a][f].total_cmp(&self.rows[b][f]).then(a.cmp(&b)));
            let mut left_sum = 0.0;
            for k in 0..n - 1 {
                left_sum += self.target[order[k]];
                let (nl, nr) = (k + 1, n - k - 1);
                if nl < self.min_leaf || nr < self.min_leaf {
                    continue;
                }
                let (lo, hi) = (self.rows[order[k]][f], self.rows[order[k + 1]][f]);
                if lo == hi {
                    continue;
                }
                let right_sum = total - left_sum;
                let gain = left_sum * left_sum / nl as f64 + right_sum * right_sum / nr as f64 - base;
                if best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, f, lo + (hi - lo) / 2.0));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn build(&mut self, idx: &[usize], depth: usize) -> usize {
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { value: self.mean(idx) });
        if depth >= self.max_depth {
            return at;
        }
        if let Some((feature, threshold)) = self.best_split(idx) {
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.rows[i][feature] <= threshold);
            let left = self.build(&l, depth + 1);
            let right = self.build(&r, depth + 1);
            self.nodes[at] = Node::Split {
                feature,
                threshold,
                left,
                right,
            };
        }
        at
    }
}

/// Fit one regression tree to `target` over the rows listed in `idx`.
pub fn fit_tree(rows: &[Vec<f64>], target: &[f64], idx: &[usize], max_depth: usize, min_samples_leaf: usize) -> Tree {
    let mut b = Builder {
        rows,
        target,
        max_depth,
        min_leaf: min_samples_leaf.max(1),
        nodes: Vec::new(),
    };
    b.build(idx, 0);
    Tree { nodes: b.nodes }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    /// Initial log-odds.
    pub base: f64,
    pub learning_rate: f64,
    pub trees: Vec<Tree>,
}

impl GbtModel {
    pub fn logit(&self, x: &[f64]) -> f64 {
        self.base + self.learning_rate * self.trees.iter().map(|t| t.predict(x)).sum::<f64>()
    }

    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }
}

/// Boost on targets in `{0, 1}`; needs both classes present.
pub fn train_gbt(rows: &[Vec<f64>], targets: &[f64], params: &GbtParams, seed: u64) -> Result<GbtModel> {
    params.validate()?;
    let n = rows.len();
    let p = targets.iter().sum::<f64>() / n as f64;
    if p <= 0.0 || p >= 1.0 {
        return Err(crate::Error::SingleClass);
    }
    let base = (p / (1.0 - p)).ln();
    let mut logits = vec![base; n];
    let mut residual = vec![0.0; n];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let take = ((n as f64 * params.subsample).round() as usize).clamp(1, n);
    let mut trees = Vec::with_capacity(params.n_trees);
    for _ in 0..params.n_trees {
        for i in 0..n {
            residual[i] = targets[i] - sigmoid(logits[i]);
        }
        let mut idx: Vec<usize> = if take == n {
            (0..n).collect()
        } else {
            sample(&mut rng, n, take).into_vec()
        };
        idx.sort_unstable();
        let tree = fit_tree(rows, &residual, &idx, params.max_depth, params.min_samples_leaf);
        for (l, x) in logits.iter_mut().zip(rows) {
            *l += params.learning_rate * tree.predict(x);
        }
        trees.push(tree);
    }
    Ok(GbtModel {
        base,
        learning_rate: params.learning_rate,
        trees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stump_splits_at_midpoint() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let t = [0.0, 0.0, 1.0, 1.0];
        let tree = fit_tree(&rows, &t, &[0, 1, 2, 3], 1, 1);
        assert_eq!(
            tree.nodes[0],
            Node::Split {
                feature: 0,
                threshold: 1.5,
                left: 1,
                right: 2
            }
        );
        assert_eq!(tree.predict(&[0.2]), 0.0);
        assert_eq!(tree.predict(&[2.7]), 1.0);
    }

    #[test]
    fn boosting_fits_xor() {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let t = [1.0, 1.0, 0.0, 0.0];
        let m = train_gbt(&rows, &t, &GbtParams::default(), 0).unwrap();
        for (r, &y) in rows.iter().zip(&t) {
            assert_eq!(m.probability(r) >= 0.5, y == 1.0);
        }
    }

    #[test]
    fn subsampling_is_seeded() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i * 7 % 11) as f64]).collect();
        let t: Vec<f64> = (0..30).map(|i| (i % 3 == 0) as u8 as f64).collect();
        let params = GbtParams {
            subsample: 0.5,
            ..GbtParams::default()
        };
        assert_eq!(train_gbt(&rows, &t, &params, 9).unwrap(), train_gbt(&rows, &t, &params, 9).unwrap());
    }
}
