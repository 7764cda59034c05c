//! Slow, direct reference implementations used to check the fast code paths.

#![allow(dead_code)]

use rand::Rng;
use rand_distr::StandardNormal;

/// Template-counting sample entropy: every ordered pair of distinct template
/// starts in `0..N-m`, tolerance `r_factor` times the population std.
pub fn sample_entropy(series: &[f64], m: usize, r_factor: f64) -> Option<f64> {
    let n = series.len();
    if n < m + 2 {
        return None;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let sd = (series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let r = r_factor * sd;
    let within = |i: usize, j: usize, len: usize| (0..len).map(|k| (series[i + k] - series[j + k]).abs()).fold(0.0, f64::max) <= r;
    let (mut a, mut b) = (0u64, 0u64);
    for i in 0..n - m {
        for j in 0..n - m {
            if i == j {
                continue;
            }
            if within(i, j, m) {
                b += 1;
            }
            if within(i, j, m + 1) {
                a += 1;
            }
        }
    }
    (a > 0 && b > 0).then(|| -(a as f64 / b as f64).ln())
}

/// Two-sided exact rank-sum p by listing every way to pick `na` of the ranks
/// `1..=na+nb`.
pub fn rank_sum_p(na: usize, nb: usize, w: f64) -> f64 {
    let n = na + nb;
    let (mut le, mut ge, mut total) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != na {
            continue;
        }
        let s: usize = (0..n).filter(|&k| mask & (1 << k) != 0).map(|k| k + 1).sum();
        total += 1;
        if s as f64 <= w + 1e-9 {
            le += 1;
        }
        if s as f64 >= w - 1e-9 {
            ge += 1;
        }
    }
    (2.0 * le.min(ge) as f64 / total as f64).min(1.0)
}

/// Levy draws `mu + c / Z^2` with `Z` standard normal.
pub fn levy_samples(rng: &mut impl Rng, n: usize, mu: f64, c: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            mu + c / (z * z)
        })
        .collect()
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for k in col..n {
                a[r][k] -= f * a[col][k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

pub fn dual_objective(kernel: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let n = y.len();
    let mut q = 0.0;
    for i in 0..n {
        for j in 0..n {
            q += alpha[i] * alpha[j] * y[i] * y[j] * kernel[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * q
}

/// Global maximum of the soft-margin dual by enumerating every active set:
/// each alpha is pinned at 0, pinned at C or free, and the free block solves
/// the equality-constrained stationarity system exactly.
pub fn svm_dual_optimum(kernel: &[Vec<f64>], y: &[f64], c: f64) -> (f64, Vec<f64>) {
    let n = y.len();
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    let combos = 3usize.pow(n as u32);
    for code in 0..combos {
        let mut state = vec![0u8; n];
        let mut k = code;
        for s in state.iter_mut() {
            *s = (k % 3) as u8;
            k /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let mut alpha: Vec<f64> = state.iter().map(|&s| if s == 1 { c } else { 0.0 }).collect();
        if free.is_empty() {
            let balance: f64 = (0..n).map(|i| y[i] * alpha[i]).sum();
            if balance.abs() > 1e-12 {
                continue;
            }
        } else {
            let f = free.len();
            let mut a = vec![vec![0.0; f + 1]; f + 1];
            let mut b = vec![0.0; f + 1];
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[r][s] = y[i] * y[j] * kernel[i][j];
                }
                a[r][f] = y[i];
                a[f][r] = y[i];
                let fixed: f64 = (0..n).filter(|j| state[*j] != 2).map(|j| y[i] * y[j] * kernel[i][j] * alpha[j]).sum();
                b[r] = 1.0 - fixed;
            }
            b[f] = -(0..n).filter(|j| state[*j] != 2).map(|j| y[j] * alpha[j]).sum::<f64>();
            let Some(x) = solve(a, b) else { continue };
            if x[..f].iter().any(|&v| v < -1e-12 || v > c + 1e-12) {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = x[r].clamp(0.0, c);
            }
        }
        let d = dual_objective(kernel, y, &alpha);
        if d > best.0 {
            best = (d, alpha);
        }
    }
    best
}

/// Best dual objective on a regular grid of the first two multipliers of a
/// three-point problem, the third fixed by the equality constraint.
pub fn svm_dual_grid3(kernel: &[Vec<f64>], y: &[f64], c: f64, steps: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..=steps {
        for j in 0..=steps {
            let a0 = c * i as f64 / steps as f64;
            let a1 = c * j as f64 / steps as f64;
            let a2 = -(y[0] * a0 + y[1] * a1) / y[2];
            if (0.0..=c).contains(&a2) {
                best = best.max(dual_objective(kernel, y, &[a0, a1, a2]));
            }
        }
    }
    best
}
