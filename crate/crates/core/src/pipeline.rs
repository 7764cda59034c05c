//! Session-level feature extraction.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BreakSession, CohortLabel, FeatureSchema, FeatureSubset, FloorPlan, SessionFeatureVector};
use crate::movement::{movement_features, MovementConfig};
use crate::social::{social_features, SocialConfig};
use crate::stats::{pool_by_class, ClassPools, RawFeature, RawPools};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub movement: MovementConfig,
    pub social: SocialConfig,
}

/// Feature vector and raw pools of one session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionExtraction {
    pub vector: SessionFeatureVector,
    pub raw: RawPools,
}

pub fn extract_session(session: &BreakSession, label: CohortLabel, plan: &FloorPlan, config: &FeatureConfig) -> SessionExtraction {
    let movement = movement_features(session, &config.movement);
    let social = social_features(session, plan, &config.social);
    let mut values: Vec<Option<f64>> = movement.values.to_vec();
    values.extend(social.values.iter().copied());

    let mut raw = RawPools::default();
    let [lpl, speed, turn, vent, oent, mu, c] = movement.pools.in_order();
    raw.extend(RawFeature::LinearPathLength, lpl);
    raw.extend(RawFeature::WalkingSpeed, speed);
    raw.extend(RawFeature::DirectionChange, turn);
    raw.extend(RawFeature::VelocityEntropy, vent);
    raw.extend(RawFeature::OrientationEntropy, oent);
    raw.extend(RawFeature::LevyMu, mu);
    raw.extend(RawFeature::LevyC, c);
    raw.extend(RawFeature::GroupCount, &social.pools.group_counts);

    SessionExtraction {
        vector: SessionFeatureVector {
            session_id: session.session_id.clone(),
            cohort_id: session.cohort_id.clone(),
            label,
            values,
        },
        raw,
    }
}

/// Feature vectors of a set of sessions, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub schema: FeatureSchema,
    pub rows: Vec<SessionFeatureVector>,
    /// Raw pools per row; empty when the table was loaded from disk.
    pub raw: Vec<RawPools>,
}

impl FeatureTable {
    pub fn new(schema: FeatureSchema, rows: Vec<SessionFeatureVector>) -> Result<Self> {
        for r in &rows {
            r.validate(&schema)?;
        }
        Ok(FeatureTable { schema, rows, raw: Vec::new() })
    }

    pub fn labels(&self) -> Vec<CohortLabel> {
        self.rows.iter().map(|r| r.label).collect()
    }

    /// Rows restricted to the columns of `subset`.
    pub fn matrix(&self, subset: FeatureSubset) -> Vec<Vec<Option<f64>>> {
        let idx = self.schema.subset_indices(subset);
        self.rows.iter().map(|r| idx.iter().map(|&i| r.values[i]).collect()).collect()
    }

    pub fn subset_names(&self, subset: FeatureSubset) -> Vec<String> {
        self.schema
            .subset_indices(subset)
            .into_iter()
            .map(|i| self.schema.names()[i].clone())
            .collect()
    }

    pub fn class_pools(&self) -> ClassPools {
        pool_by_class(self.rows.iter().map(|r| r.label).zip(self.raw.iter()))
    }
}

/// Extract every session in parallel. `labels` maps cohort id to label.
pub fn extract_features(
    sessions: &[BreakSession],
    labels: &BTreeMap<String, CohortLabel>,
    plan: &FloorPlan,
    config: &FeatureConfig,
) -> Result<FeatureTable> {
    let schema = FeatureSchema::for_plan(plan);
    let extracted: Vec<SessionExtraction> = sessions
        .par_iter()
        .map(|s| {
            let label = *labels
                .get(&s.cohort_id)
                .ok_or_else(|| Error::Validation(format!("session {} has unknown cohort {}", s.session_id, s.cohort_id)))?;
            Ok(extract_session(s, label, plan, config))
        })
        .collect::<Result<_>>()?;
    let (rows, raw) = extracted.into_iter().map(|e| (e.vector, e.raw)).unzip();
    Ok(FeatureTable { schema, rows, raw })
}
