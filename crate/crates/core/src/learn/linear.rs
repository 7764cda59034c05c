//! Logistic regression by full-batch gradient descent, optionally with an L1
//! penalty applied by proximal (soft-threshold) steps.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub iterations: usize,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            learning_rate: 0.1,
            iterations: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LassoParams {
    pub learning_rate: f64,
    pub iterations: usize,
    pub lambda: f64,
}

impl Default for LassoParams {
    fn default() -> Self {
        LassoParams {
            learning_rate: 0.1,
            iterations: 2000,
            lambda: 0.01,
        }
    }
}

fn check(learning_rate: f64, iterations: usize, lambda: f64) -> Result<()> {
    if !(learning_rate > 0.0 && learning_rate.is_finite()) {
        return Err(invalid("learning rate must be positive"));
    }
    if iterations == 0 {
        return Err(invalid("iterations must be at least 1"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda must be non-negative"));
    }
    Ok(())
}

impl LogisticParams {
    pub fn validate(&self) -> Result<()> {
        check(self.learning_rate, self.iterations, 0.0)
    }
}

impl LassoParams {
    pub fn validate(&self) -> Result<()> {
        check(self.learning_rate, self.iterations, self.lambda)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn logit(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    /// Probability of the positive class.
    pub fn probability(&self, x: &[f64]) -> f64 {
        sigmoid(self.logit(x))
    }
}

/// Minimise mean log-loss (plus `lambda * |w|_1`, bias unpenalised) for
/// targets in `{0, 1}`, starting from zero weights.
pub fn train_linear(rows: &[Vec<f64>], targets: &[f64], learning_rate: f64, iterations: usize, lambda: f64) -> Result<LinearModel> {
    check(learning_rate, iterations, lambda)?;
    let n = rows.len() as f64;
    let d = rows.first().map_or(0, Vec::len);
    let mut model = LinearModel {
        weights: vec![0.0; d],
        bias: 0.0,
    };
    let mut grad = vec![0.0; d];
    for _ in 0..iterations {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for (x, &t) in rows.iter().zip(targets) {
            let err = model.probability(x) - t;
            for (g, v) in grad.iter_mut().zip(x) {
                *g += err * v;
            }
            grad_b += err;
        }
        for (w, g) in model.weights.iter_mut().zip(&grad) {
            *w -= learning_rate * g / n;
            if lambda > 0.0 {
                let shrink = learning_rate * lambda;
                *w = w.signum() * (w.abs() - shrink).max(0.0);
            }
        }
        model.bias -= learning_rate * grad_b / n;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert_eq!(sigmoid(800.0), 1.0);
    }

    #[test]
    fn penalty_shrinks_weights() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![(i % 2) as f64, (i % 3) as f64 / 2.0]).collect();
        let t: Vec<f64> = (0..20).map(|i| (i % 2) as f64).collect();
        let plain = train_linear(&rows, &t, 0.1, 2000, 0.0).unwrap();
        let l1 = train_linear(&rows, &t, 0.1, 2000, 0.05).unwrap();
        let norm = |m: &LinearModel| m.weights.iter().map(|w| w.abs()).sum::<f64>();
        assert!(l1.weights[0] > 0.5);
        assert!(norm(&l1) < norm(&plain));
    }
}
