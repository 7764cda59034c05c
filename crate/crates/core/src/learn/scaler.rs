//! Min-max rescaling with training-mean imputation.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Per-feature bounds and imputation constants learned from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerState {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// Training mean of the observed values; substituted for missing ones.
    pub fill: Vec<f64>,
}

impl ScalerState {
    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Scale one row. Missing values take the training mean; constant
    /// features map to 0.5; results are clipped to `[0, 1]`.
    pub fn apply(&self, row: &[Option<f64>]) -> Vec<f64> {
        assert_eq!(row.len(), self.dim(), "row width differs from scaler");
        row.iter()
            .enumerate()
            .map(|(j, v)| {
                let x = v.unwrap_or(self.fill[j]);
                let span = self.max[j] - self.min[j];
                if span <= 0.0 {
                    0.5
                } else {
                    ((x - self.min[j]) / span).clamp(0.0, 1.0)
                }
            })
            .collect()
    }

    pub fn apply_all(&self, rows: &[Vec<Option<f64>>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}

/// Learn min, max and mean per column. A column with no observed values is
/// treated as constant.
pub fn fit_scaler(rows: &[Vec<Option<f64>>]) -> Result<ScalerState> {
    let first = rows.first().ok_or_else(|| invalid("scaler needs at least one row"))?;
    let d = first.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(invalid("ragged feature rows"));
    }
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    let mut sum = vec![0.0; d];
    let mut count = vec![0usize; d];
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            if let Some(x) = *v {
                if !x.is_finite() {
                    return Err(invalid(format!("non-finite value in column {j}")));
                }
                min[j] = min[j].min(x);
                max[j] = max[j].max(x);
                sum[j] += x;
                count[j] += 1;
            }
        }
    }
    let mut fill = vec![0.0; d];
    for j in 0..d {
        if count[j] == 0 {
            min[j] = 0.0;
            max[j] = 0.0;
        } else {
            fill[j] = sum[j] / count[j] as f64;
        }
    }
    Ok(ScalerState { min, max, fill })
}
