//! RBF-kernel support vector machine trained by sequential minimal
//! optimization with second-order working-set selection.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    /// Kernel width; `None` selects `1 / (d * mean feature variance)`.
    pub gamma: Option<f64>,
    /// Stopping tolerance on the maximal KKT violation.
    pub tol: f64,
    /// Iteration cap, in multiples of the training-set size.
    pub max_passes: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            gamma: None,
            tol: 1e-3,
            max_passes: 200,
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid("svm C must be positive"));
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(invalid("svm gamma must be positive"));
            }
        }
        if !(self.tol > 0.0) {
            return Err(invalid("svm tolerance must be positive"));
        }
        if self.max_passes == 0 {
            return Err(invalid("svm max_passes must be at least 1"));
        }
        Ok(())
    }
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// `1 / (d * v)` with `v` the mean of the per-column population variances;
/// `1 / d` when every column is constant.
pub fn default_gamma(rows: &[Vec<f64>]) -> f64 {
    let d = rows.first().map_or(1, Vec::len).max(1);
    let n = rows.len() as f64;
    let mut total = 0.0;
    for j in 0..d {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        total += rows.iter().map(|r| (r[j] - mean) * (r[j] - mean)).sum::<f64>() / n;
    }
    let v = total / d as f64;
    if v > 0.0 {
        1.0 / (d as f64 * v)
    } else {
        1.0 / d as f64
    }
}

/// Solution of the soft-margin dual.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Offset such that `f(x) = sum alpha_i y_i K(x_i, x) - rho`.
    pub rho: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Dual objective `sum alpha - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij`.
pub fn dual_objective(kernel: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * kernel[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

const TAU: f64 = 1e-12;

/// Solve the dual for a precomputed kernel matrix and labels in `{-1, +1}`.
pub fn solve_dual(kernel: &[Vec<f64>], y: &[f64], c: f64, tol: f64, max_iter: usize) -> DualSolution {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    // gradient of 1/2 a'Qa - e'a
    let mut grad = vec![-1.0; n];
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[i][j];
    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            if in_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = Some(t);
                }
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j_sel = None;
        let mut best = f64::INFINITY;
        if let Some(i) = i_sel {
            for t in 0..n {
                if !in_low(alpha[t], y[t]) {
                    continue;
                }
                let v = -y[t] * grad[t];
                gmin = gmin.min(v);
                let b = gmax - v;
                if b > 0.0 {
                    let a = kernel[i][i] + kernel[t][t] - 2.0 * kernel[i][t];
                    let score = -b * b / if a > 0.0 { a } else { TAU };
                    if score < best {
                        best = score;
                        j_sel = Some(t);
                    }
                }
            }
        }
        let (Some(i), Some(j)) = (i_sel, j_sel) else {
            converged = true;
            break;
        };
        if gmax - gmin < tol {
            converged = true;
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = kernel[i][i] + kernel[j][j] - 2.0 * kernel[i][j];
        if quad <= 0.0 {
            quad = TAU;
        }
        let (mut ai, mut aj) = (old_i, old_j);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        alpha[i] = ai;
        alpha[j] = aj;
        let (di, dj) = (ai - old_i, aj - old_j);
        for t in 0..n {
            grad[t] += q(t, i) * di + q(t, j) * dj;
        }
    }

    // offset: average over free variables, else the midpoint of the bounds
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free_n) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free_n += 1;
        }
    }
    let rho = if free_n > 0 {
        free_sum / free_n as f64
    } else {
        (ub + lb) / 2.0
    };
    DualSolution {
        alpha,
        rho,
        iterations,
        converged,
    }
}

/// Full kernel matrix of `rows`.
pub fn kernel_matrix(rows: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        k[i][i] = 1.0;
        for j in 0..i {
            let v = rbf(&rows[i], &rows[j], gamma);
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

/// Trained classifier; only support vectors are kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub gamma: f64,
    pub support_vectors: Vec<Vec<f64>>,
    /// `alpha_i * y_i` per support vector.
    pub coefficients: Vec<f64>,
    pub rho: f64,
}

impl SvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, coef)| coef * rbf(sv, x, self.gamma))
            .sum::<f64>()
            - self.rho
    }
}

/// Train on rows with labels in `{-1, +1}`.
pub fn train_svm(rows: &[Vec<f64>], y: &[f64], params: &SvmParams) -> Result<SvmModel> {
    params.validate()?;
    let gamma = params.gamma.unwrap_or_else(|| default_gamma(rows));
    let kernel = kernel_matrix(rows, gamma);
    let max_iter = params.max_passes.saturating_mul(rows.len().max(1));
    let sol = solve_dual(&kernel, y, params.c, params.tol, max_iter);
    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for (i, &a) in sol.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(rows[i].clone());
            coefficients.push(a * y[i]);
        }
    }
    Ok(SvmModel {
        gamma,
        support_vectors,
        coefficients,
        rho: sol.rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_pair() {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let m = train_svm(&rows, &[-1.0, 1.0], &SvmParams::default()).unwrap();
        assert!(m.decision(&rows[0]) < 0.0);
        assert!(m.decision(&rows[1]) > 0.0);
    }

    #[test]
    fn xor_is_fitted() {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
        let y = [1.0, 1.0, -1.0, -1.0];
        let params = SvmParams {
            c: 10.0,
            ..SvmParams::default()
        };
        let m = train_svm(&rows, &y, &params).unwrap();
        for (r, &t) in rows.iter().zip(&y) {
            assert!(m.decision(r) * t > 0.0);
        }
    }

    #[test]
    fn default_gamma_of_unit_square() {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        assert!((default_gamma(&rows) - 2.0).abs() < 1e-12);
        assert_eq!(default_gamma(&[vec![3.0, 3.0]]), 0.5);
    }
}
