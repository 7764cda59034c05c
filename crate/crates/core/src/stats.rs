//! Rank-sum testing, Wald intervals and descriptive statistics.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{invalid, Result};
use crate::model::CohortLabel;

/// Two-sided z for a 95% interval.
pub const Z_95: f64 = 1.96;

/// Largest combined sample size tested by exact enumeration.
pub const EXACT_MAX_TOTAL: usize = 12;

/// Arithmetic mean and population standard deviation (two-pass). `None` for
/// an empty slice.
pub fn descriptive(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Half-width of the normal-approximation 95% interval for a proportion.
pub fn wald_ci_halfwidth(p_hat: f64, n: usize) -> f64 {
    assert!(n >= 1, "interval needs at least one observation");
    let p = p_hat.clamp(0.0, 1.0);
    Z_95 * (p * (1.0 - p) / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankSumMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankSumResult {
    /// Sum of the (mid-)ranks of the first sample.
    pub statistic: f64,
    /// Continuity-corrected normal score of the statistic.
    pub z: f64,
    pub p_two_sided: f64,
    pub method: RankSumMethod,
}

/// Mid-ranks (1-based) of `values`, plus the sum of `t^3 - t` over tie
/// groups.
pub fn midranks(values: &[f64]) -> (Vec<f64>, f64) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = rank;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    (ranks, tie_term)
}

/// Null distribution of the rank sum of `na` items drawn from ranks
/// `1..=na+nb`: `counts[s]` is the number of subsets with sum `s`.
fn rank_sum_counts(na: usize, nb: usize) -> Vec<u128> {
    let n = na + nb;
    let max_sum = n * (n + 1) / 2;
    // table[k][s]: subsets of size k with sum s, built one rank at a time
    let mut table = vec![vec![0u128; max_sum + 1]; na + 1];
    table[0][0] = 1;
    for rank in 1..=n {
        for k in (1..=na.min(rank)).rev() {
            for s in (rank..=max_sum).rev() {
                table[k][s] += table[k - 1][s - rank];
            }
        }
    }
    table.swap_remove(na)
}

/// Exact two-sided p of an integer rank sum `w` for tie-free samples.
pub fn rank_sum_exact_p(na: usize, nb: usize, w: f64) -> f64 {
    let counts = rank_sum_counts(na, nb);
    let total: u128 = counts.iter().sum();
    let w = w.round() as usize;
    let below: u128 = counts[..=w.min(counts.len() - 1)].iter().sum();
    let above: u128 = counts[w.min(counts.len())..].iter().sum();
    let tail = below.min(above) as f64 / total as f64;
    (2.0 * tail).min(1.0)
}

/// Continuity-corrected normal approximation with tie-corrected variance.
/// Returns `(z, p)`; `p = 1` when the variance vanishes.
pub fn rank_sum_normal(na: usize, nb: usize, w: f64, tie_term: f64) -> (f64, f64) {
    let (fa, fb) = (na as f64, nb as f64);
    let n = fa + fb;
    let mean = fa * (n + 1.0) / 2.0;
    let tie_adj = if n > 1.0 { tie_term / (n * (n - 1.0)) } else { 0.0 };
    let var = fa * fb / 12.0 * ((n + 1.0) - tie_adj);
    if var <= 0.0 {
        return (0.0, 1.0);
    }
    let diff = w - mean;
    let z = diff.signum() * (diff.abs() - 0.5).max(0.0) / var.sqrt();
    let p = erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0);
    (z, p)
}

/// Two-sided Wilcoxon rank-sum test of `a` against `b`.
///
/// Tie-free inputs with at most twelve values in total get the exact null
/// distribution; everything else uses the normal approximation.
pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<RankSumResult> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("rank-sum test needs two non-empty samples"));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(invalid("rank-sum test needs finite values"));
    }
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let (ranks, tie_term) = midranks(&pooled);
    let statistic: f64 = ranks[..a.len()].iter().sum();
    let (z, p_normal) = rank_sum_normal(a.len(), b.len(), statistic, tie_term);
    let exact = tie_term == 0.0 && pooled.len() <= EXACT_MAX_TOTAL;
    let (p_two_sided, method) = if exact {
        (rank_sum_exact_p(a.len(), b.len(), statistic), RankSumMethod::Exact)
    } else {
        (p_normal, RankSumMethod::Normal)
    };
    Ok(RankSumResult {
        statistic,
        z,
        p_two_sided,
        method,
    })
}

/// Raw (unsummarised) quantities compared between classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RawFeature {
    LinearPathLength,
    WalkingSpeed,
    DirectionChange,
    VelocityEntropy,
    OrientationEntropy,
    LevyMu,
    LevyC,
    GroupCount,
}

impl RawFeature {
    pub const ALL: [RawFeature; 8] = [
        RawFeature::LinearPathLength,
        RawFeature::WalkingSpeed,
        RawFeature::DirectionChange,
        RawFeature::VelocityEntropy,
        RawFeature::OrientationEntropy,
        RawFeature::LevyMu,
        RawFeature::LevyC,
        RawFeature::GroupCount,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RawFeature::LinearPathLength => "linear_path_length",
            RawFeature::WalkingSpeed => "walking_speed",
            RawFeature::DirectionChange => "direction_change",
            RawFeature::VelocityEntropy => "velocity_entropy",
            RawFeature::OrientationEntropy => "orientation_entropy",
            RawFeature::LevyMu => "levy_mu",
            RawFeature::LevyC => "levy_c",
            RawFeature::GroupCount => "group_count",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Raw values of every [`RawFeature`], concatenated over however many
/// sessions were pushed in.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RawPools {
    values: [Vec<f64>; 8],
}

impl RawPools {
    pub fn get(&self, feature: RawFeature) -> &[f64] {
        &self.values[feature.index()]
    }

    pub fn extend(&mut self, feature: RawFeature, values: &[f64]) {
        self.values[feature.index()].extend_from_slice(values);
    }

    pub fn append(&mut self, other: &RawPools) {
        for f in RawFeature::ALL {
            self.extend(f, other.get(f));
        }
    }
}

/// Raw pools split by class label.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassPools {
    pub high: RawPools,
    pub low: RawPools,
}

/// Concatenate per-session raw values by class.
pub fn pool_by_class<'a>(sessions: impl IntoIterator<Item = (CohortLabel, &'a RawPools)>) -> ClassPools {
    let mut out = ClassPools::default();
    for (label, pools) in sessions {
        match label {
            CohortLabel::High => out.high.append(pools),
            CohortLabel::Low => out.low.append(pools),
        }
    }
    out
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n.is_multiple_of(2) {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    } else {
        v[n / 2]
    })
}

/// One row of the class-difference table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSumRow {
    pub feature: RawFeature,
    pub n_high: usize,
    pub n_low: usize,
    pub median_high: Option<f64>,
    pub median_low: Option<f64>,
    /// `None` when one class has no values.
    pub test: Option<RankSumResult>,
}

impl RankSumRow {
    pub fn significant(&self, alpha: f64) -> bool {
        self.test.is_some_and(|t| t.p_two_sided < alpha)
    }
}

/// Rank-sum test of every raw feature, high class as the first sample.
pub fn rank_sum_table(pools: &ClassPools) -> Vec<RankSumRow> {
    RawFeature::ALL
        .iter()
        .map(|&feature| {
            let (h, l) = (pools.high.get(feature), pools.low.get(feature));
            RankSumRow {
                feature,
                n_high: h.len(),
                n_low: l.len(),
                median_high: median(h),
                median_low: median(l),
                test: wilcoxon_rank_sum(h, l).ok(),
            }
        })
        .collect()
}
