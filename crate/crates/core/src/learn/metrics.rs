use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::CohortLabel;
use crate::stats::wald_ci_halfwidth;

/// A proportion with its 95% Wald half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub ci95: f64,
}

impl Estimate {
    fn new(value: f64, n_ci: usize) -> Self {
        Estimate {
            value,
            ci95: wald_ci_halfwidth(value, n_ci),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Precision, recall, F1 and accuracy with the low class as positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub confusion: Confusion,
    /// Abstentions, counted as negative predictions.
    pub abstained: usize,
    pub precision: Estimate,
    pub recall: Estimate,
    pub f1: Estimate,
    pub accuracy: Estimate,
}

/// Score predictions against labels; undefined ratios are reported as 0.
pub fn metrics(predictions: &[Option<CohortLabel>], labels: &[CohortLabel], n_ci: usize) -> Result<Metrics> {
    if predictions.is_empty() || predictions.len() != labels.len() {
        return Err(invalid("metrics need equal-length, non-empty predictions and labels"));
    }
    if n_ci == 0 {
        return Err(invalid("interval sample size must be at least 1"));
    }
    let mut c = Confusion::default();
    let mut abstained = 0;
    for (p, t) in predictions.iter().zip(labels) {
        abstained += p.is_none() as usize;
        let predicted = p.is_some_and(|l| l.is_positive());
        match (predicted, t.is_positive()) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    let accuracy = ratio(c.tp + c.tn, c.total());
    Ok(Metrics {
        confusion: c,
        abstained,
        precision: Estimate::new(precision, n_ci),
        recall: Estimate::new(recall, n_ci),
        f1: Estimate::new(f1, n_ci),
        accuracy: Estimate::new(accuracy, n_ci),
    })
}

/// F1 of the positive class, without intervals.
pub fn f1_score(predictions: &[CohortLabel], labels: &[CohortLabel]) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (p, t) in predictions.iter().zip(labels) {
        match (p.is_positive(), t.is_positive()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    }
}
