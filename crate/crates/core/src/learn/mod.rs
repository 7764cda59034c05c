//! Scaling, classifiers, leave-one-out evaluation and permutation
//! importance.

pub mod classifier;
pub mod cv;
pub mod gbt;
pub mod importance;
pub mod knn;
pub mod linear;
pub mod metrics;
pub mod scaler;
pub mod svm;

pub use classifier::{train, Model, ModelKind, ModelSpec};
pub use cv::{loocv, FittedPipeline, LoocvOptions, Prediction};
pub use importance::{permutation_importance, FeatureImportance, ImportanceReport};
pub use metrics::{f1_score, metrics, Confusion, Estimate, Metrics};
pub use scaler::{fit_scaler, ScalerState};

/// Seed for stream `stream` of a run seeded with `seed` (SplitMix64 finaliser).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
