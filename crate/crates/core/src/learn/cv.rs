use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classifier::{train, Model, ModelSpec};
use super::derive_seed;
use super::scaler::{fit_scaler, ScalerState};
use crate::error::{invalid, Error, Result};
use crate::model::CohortLabel;

/// Scaler plus classifier, applied to raw (possibly masked) rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub scaler: ScalerState,
    pub model: Model,
}

impl FittedPipeline {
    pub fn fit(spec: &ModelSpec, rows: &[Vec<Option<f64>>], labels: &[CohortLabel], seed: u64) -> Result<Self> {
        let scaler = fit_scaler(rows)?;
        Self::fit_with_scaler(spec, scaler, rows, labels, seed)
    }

    pub fn fit_with_scaler(
        spec: &ModelSpec,
        scaler: ScalerState,
        rows: &[Vec<Option<f64>>],
        labels: &[CohortLabel],
        seed: u64,
    ) -> Result<Self> {
        let scaled = scaler.apply_all(rows);
        let model = train(spec, &scaled, labels, seed)?;
        Ok(FittedPipeline { scaler, model })
    }

    pub fn score(&self, row: &[Option<f64>]) -> f64 {
        self.model.score(&self.scaler.apply(row))
    }

    pub fn predict(&self, row: &[Option<f64>]) -> CohortLabel {
        self.model.predict(&self.scaler.apply(row))
    }
}

/// Out-of-fold prediction; `label` is `None` when the fold abstained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: Option<CohortLabel>,
    pub score: Option<f64>,
}

impl Prediction {
    pub const ABSTAIN: Prediction = Prediction { label: None, score: None };
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoocvOptions {
    /// Fit one scaler on every row instead of refitting inside each fold.
    pub global_scaling: bool,
    pub seed: u64,
}

/// Leave-one-out cross-validation. Fold `k` is trained on every row but
/// `k` and predicts row `k`; a fold whose training labels are all one class
/// abstains.
pub fn loocv(spec: &ModelSpec, rows: &[Vec<Option<f64>>], labels: &[CohortLabel], options: &LoocvOptions) -> Result<Vec<Prediction>> {
    spec.validate()?;
    let n = rows.len();
    if n < 2 {
        return Err(invalid("cross-validation needs at least two rows"));
    }
    if labels.len() != n {
        return Err(invalid(format!("{n} rows but {} labels", labels.len())));
    }
    let global = if options.global_scaling {
        Some(fit_scaler(rows)?)
    } else {
        None
    };
    (0..n)
        .into_par_iter()
        .map(|k| {
            let train_rows: Vec<Vec<Option<f64>>> = rows.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, r)| r.clone()).collect();
            let train_labels: Vec<CohortLabel> = labels.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &l)| l).collect();
            let scaler = match &global {
                Some(s) => s.clone(),
                None => fit_scaler(&train_rows)?,
            };
            match FittedPipeline::fit_with_scaler(spec, scaler, &train_rows, &train_labels, derive_seed(options.seed, k as u64)) {
                Ok(p) => {
                    let score = p.score(&rows[k]);
                    Ok(Prediction {
                        label: Some(CohortLabel::from_positive(score > 0.0)),
                        score: Some(score),
                    })
                }
                Err(Error::SingleClass) => Ok(Prediction::ABSTAIN),
                Err(e) => Err(e),
            }
        })
        .collect()
}
