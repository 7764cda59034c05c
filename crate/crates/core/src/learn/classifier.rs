use serde::{Deserialize, Serialize};

use super::gbt::{train_gbt, GbtModel, GbtParams};
use super::knn::NearestNeighbor;
use super::linear::{train_linear, LassoParams, LinearModel, LogisticParams};
use super::svm::{train_svm, SvmModel, SvmParams};
use crate::error::{invalid, Error, Result};
use crate::model::CohortLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    SvmRbf,
    Gbt,
    Logistic,
    Lasso,
    NearestNeighbor,
}

impl ModelKind {
    /// The four classifiers compared in reports.
    pub const REPORTED: [ModelKind; 4] = [ModelKind::SvmRbf, ModelKind::Gbt, ModelKind::Logistic, ModelKind::Lasso];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::SvmRbf => "svm_rbf",
            ModelKind::Gbt => "gbt",
            ModelKind::Logistic => "logistic",
            ModelKind::Lasso => "lasso",
            ModelKind::NearestNeighbor => "nearest_neighbor",
        }
    }

    /// Short display name used in tables.
    pub fn display(self) -> &'static str {
        match self {
            ModelKind::SvmRbf => "SVM",
            ModelKind::Gbt => "GBT",
            ModelKind::Logistic => "LR",
            ModelKind::Lasso => "Lasso",
            ModelKind::NearestNeighbor => "1NN",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "svm_rbf" | "svm" => Ok(ModelKind::SvmRbf),
            "gbt" | "xgb" => Ok(ModelKind::Gbt),
            "logistic" | "lr" => Ok(ModelKind::Logistic),
            "lasso" => Ok(ModelKind::Lasso),
            "nearest_neighbor" | "1nn" | "knn" => Ok(ModelKind::NearestNeighbor),
            other => Err(Error::Config(format!("unknown model kind {other:?}"))),
        }
    }
}

/// A classifier family together with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    SvmRbf(SvmParams),
    Gbt(GbtParams),
    Logistic(LogisticParams),
    Lasso(LassoParams),
    NearestNeighbor,
}

impl ModelSpec {
    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::SvmRbf => ModelSpec::SvmRbf(SvmParams::default()),
            ModelKind::Gbt => ModelSpec::Gbt(GbtParams::default()),
            ModelKind::Logistic => ModelSpec::Logistic(LogisticParams::default()),
            ModelKind::Lasso => ModelSpec::Lasso(LassoParams::default()),
            ModelKind::NearestNeighbor => ModelSpec::NearestNeighbor,
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::SvmRbf(_) => ModelKind::SvmRbf,
            ModelSpec::Gbt(_) => ModelKind::Gbt,
            ModelSpec::Logistic(_) => ModelKind::Logistic,
            ModelSpec::Lasso(_) => ModelKind::Lasso,
            ModelSpec::NearestNeighbor => ModelKind::NearestNeighbor,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::SvmRbf(p) => p.validate(),
            ModelSpec::Gbt(p) => p.validate(),
            ModelSpec::Logistic(p) => p.validate(),
            ModelSpec::Lasso(p) => p.validate(),
            ModelSpec::NearestNeighbor => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    SvmRbf(SvmModel),
    Gbt(GbtModel),
    Logistic(LinearModel),
    Lasso(LinearModel),
    NearestNeighbor(NearestNeighbor),
}

impl Model {
    /// Real-valued score; positive means the positive (low) class.
    pub fn score(&self, x: &[f64]) -> f64 {
        match self {
            Model::SvmRbf(m) => m.decision(x),
            Model::Gbt(m) => m.logit(x),
            Model::Logistic(m) | Model::Lasso(m) => m.logit(x),
            Model::NearestNeighbor(m) => 2.0 * m.predict(x) - 1.0,
        }
    }

    pub fn predict(&self, x: &[f64]) -> CohortLabel {
        CohortLabel::from_positive(self.score(x) > 0.0)
    }
}

/// Fit a classifier on already-scaled rows.
pub fn train(spec: &ModelSpec, rows: &[Vec<f64>], labels: &[CohortLabel], seed: u64) -> Result<Model> {
    spec.validate()?;
    if rows.len() != labels.len() {
        return Err(invalid(format!("{} rows but {} labels", rows.len(), labels.len())));
    }
    if rows.is_empty() {
        return Err(invalid("training needs at least one row"));
    }
    let d = rows[0].len();
    if rows.iter().any(|r| r.len() != d || r.iter().any(|v| !v.is_finite())) {
        return Err(invalid("training rows must be finite and of equal width"));
    }
    let positives = labels.iter().filter(|l| l.is_positive()).count();
    if positives == 0 || positives == labels.len() {
        return Err(Error::SingleClass);
    }
    let targets: Vec<f64> = labels.iter().map(|l| l.is_positive() as u8 as f64).collect();
    Ok(match spec {
        ModelSpec::SvmRbf(p) => {
            let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
            Model::SvmRbf(train_svm(rows, &y, p)?)
        }
        ModelSpec::Gbt(p) => Model::Gbt(train_gbt(rows, &targets, p, seed)?),
        ModelSpec::Logistic(p) => Model::Logistic(train_linear(rows, &targets, p.learning_rate, p.iterations, 0.0)?),
        ModelSpec::Lasso(p) => Model::Lasso(train_linear(rows, &targets, p.learning_rate, p.iterations, p.lambda)?),
        ModelSpec::NearestNeighbor => Model::NearestNeighbor(NearestNeighbor {
            rows: rows.to_vec(),
            targets,
        }),
    })
}
