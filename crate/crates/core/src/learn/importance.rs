use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::FittedPipeline;
use super::derive_seed;
use super::metrics::f1_score;
use crate::error::{invalid, Result};
use crate::model::CohortLabel;
use crate::stats::descriptive;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: usize,
    /// Mean F1 drop over the repeats.
    pub mean_drop: f64,
    pub std_drop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub baseline_f1: f64,
    pub repeats: usize,
    pub features: Vec<FeatureImportance>,
}

impl ImportanceReport {
    /// Feature indices ordered by decreasing mean drop (index breaks ties).
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.features.len()).collect();
        order.sort_by(|&a, &b| {
            self.features[b]
                .mean_drop
                .total_cmp(&self.features[a].mean_drop)
                .then(a.cmp(&b))
        });
        order.into_iter().map(|i| self.features[i].feature).collect()
    }
}

/// Permutation importance: for each column, shuffle it `repeats` times and
/// record how far F1 falls below the unshuffled score. Every (feature,
/// repeat) pair has its own derived seed.
pub fn permutation_importance(
    pipeline: &FittedPipeline,
    rows: &[Vec<Option<f64>>],
    labels: &[CohortLabel],
    repeats: usize,
    seed: u64,
) -> Result<ImportanceReport> {
    if rows.len() < 2 || rows.len() != labels.len() {
        return Err(invalid("importance needs at least two labelled rows"));
    }
    let d = pipeline.scaler.dim();
    let predict_all = |rs: &[Vec<Option<f64>>]| -> Vec<CohortLabel> { rs.iter().map(|r| pipeline.predict(r)).collect() };
    let baseline_f1 = f1_score(&predict_all(rows), labels);
    let features = (0..d)
        .into_par_iter()
        .map(|j| {
            let drops: Vec<f64> = (0..repeats)
                .map(|r| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(derive_seed(seed, j as u64), r as u64));
                    let mut column: Vec<Option<f64>> = rows.iter().map(|row| row[j]).collect();
                    column.shuffle(&mut rng);
                    let permuted: Vec<Vec<Option<f64>>> = rows
                        .iter()
                        .zip(column)
                        .map(|(row, v)| {
                            let mut row = row.clone();
                            row[j] = v;
                            row
                        })
                        .collect();
                    baseline_f1 - f1_score(&predict_all(&permuted), labels)
                })
                .collect();
            let (mean_drop, std_drop) = descriptive(&drops).unwrap_or((0.0, 0.0));
            FeatureImportance {
                feature: j,
                mean_drop,
                std_drop,
            }
        })
        .collect();
    Ok(ImportanceReport {
        baseline_f1,
        repeats,
        features,
    })
}
