//! One-nearest-neighbour baseline.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestNeighbor {
    pub rows: Vec<Vec<f64>>,
    /// Targets in `{0, 1}`.
    pub targets: Vec<f64>,
}

impl NearestNeighbor {
    /// Target of the closest training row (Euclidean; first wins ties).
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for (r, &t) in self.rows.iter().zip(&self.targets) {
            let d: f64 = r.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best.0 {
                best = (d, t);
            }
        }
        best.1
    }
}
