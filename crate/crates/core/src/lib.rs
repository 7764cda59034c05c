//! Behavioral analytics over 1 Hz indoor trajectories: movement and social
//! features, rank-sum screening, classifiers and a synthetic cohort
//! simulator.

pub mod error;
pub mod geometry;
pub mod ingest;
pub mod learn;
pub mod model;
pub mod movement;
pub mod pipeline;
pub mod simulate;
pub mod social;
pub mod stats;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/tracks.md")]
    pub mod tracks {}
    #[doc = include_str!("../../../book/src/movement.md")]
    pub mod movement {}
    #[doc = include_str!("../../../book/src/social.md")]
    pub mod social {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    pub mod statistics {}
    #[doc = include_str!("../../../book/src/classification.md")]
    pub mod classification {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    pub mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
