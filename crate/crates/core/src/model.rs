//! Domain types shared by the ingestion, feature and learning layers.
//!
//! Every type here is an immutable value once constructed; the constructors
//! enforce the invariants so downstream code can rely on them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use crate::geometry::{BBox, Point2D};
use crate::error::{invalid, Error, Result};
use crate::geometry::{is_simple, point_in_polygon, polygons_overlap, signed_area};

/// Name of the catch-all region every floor plan carries.
pub const OTHER_REGION: &str = "other";

/// Default MoCA cut point: a cohort is high functioning when its mean score
/// exceeds this value.
pub const DEFAULT_MOCA_THRESHOLD: f64 = 21.0;

/// One 1 Hz observation of a tracked person.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackSample {
    /// Whole seconds since session start.
    pub t: u32,
    pub position: Point2D,
    /// Body orientation in degrees, [0, 360), when the tracker reported one.
    pub orientation: Option<f64>,
}

impl TrackSample {
    pub fn new(t: u32, position: Point2D, orientation: Option<f64>) -> Self {
        Self {
            t,
            position,
            orientation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.position.is_finite() {
            return Err(invalid(format!("non-finite position at t={}", self.t)));
        }
        if let Some(o) = self.orientation {
            if !(0.0..360.0).contains(&o) {
                return Err(invalid(format!(
                    "orientation {o} outside [0, 360) at t={}",
                    self.t
                )));
            }
        }
        Ok(())
    }
}

/// A single person-track inside one break session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    track_id: String,
    samples: Vec<TrackSample>,
}

impl Trajectory {
    /// Validates ordering, sample count and sample values.
    pub fn new(track_id: impl Into<String>, samples: Vec<TrackSample>) -> Result<Self> {
        let track_id = track_id.into();
        if samples.len() < 2 {
            return Err(invalid(format!(
                "trajectory {track_id} has {} samples, need at least 2",
                samples.len()
            )));
        }
        for s in &samples {
            s.validate()?;
        }
        if let Some(w) = samples.windows(2).find(|w| w[1].t <= w[0].t) {
            return Err(invalid(format!(
                "trajectory {track_id} timestamps not strictly increasing ({} then {})",
                w[0].t, w[1].t
            )));
        }
        Ok(Self { track_id, samples })
    }

    pub fn track_id(&self) -> &str {
        &self.track_id
    }

    pub fn samples(&self) -> &[TrackSample] {
        &self.samples
    }

    pub fn positions(&self) -> impl Iterator<Item = Point2D> + '_ {
        self.samples.iter().map(|s| s.position)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_gap(&self) -> u32 {
        self.samples
            .windows(2)
            .map(|w| w[1].t - w[0].t)
            .max()
            .unwrap_or(0)
    }

    /// Return a copy with every position mapped through `f`.
    pub fn map_positions(&self, f: impl Fn(Point2D) -> Point2D) -> Trajectory {
        Trajectory {
            track_id: self.track_id.clone(),
            samples: self
                .samples
                .iter()
                .map(|s| TrackSample::new(s.t, f(s.position), s.orientation))
                .collect(),
        }
    }
}

/// Result of cutting a sample run at tracker dropouts.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct GapSplit {
    pub trajectories: Vec<Trajectory>,
    /// Fragments shorter than two samples, which cannot form a trajectory.
    pub dropped_singletons: usize,
}

/// Cut a time-sorted sample run wherever consecutive timestamps differ by more
/// than `max_gap_s`. The first fragment keeps `track_id`; later ones get a
/// `~k` suffix.
pub fn split_on_gaps(track_id: &str, samples: &[TrackSample], max_gap_s: u32) -> Result<GapSplit> {
    let mut out = GapSplit::default();
    let mut start = 0;
    let mut part = 0usize;
    for i in 0..=samples.len() {
        let boundary = i == samples.len() || (i > start && samples[i].t - samples[i - 1].t > max_gap_s);
        if !boundary {
            continue;
        }
        let chunk = &samples[start..i];
        if chunk.len() >= 2 {
            let id = if part == 0 {
                track_id.to_string()
            } else {
                format!("{track_id}~{part}")
            };
            out.trajectories.push(Trajectory::new(id, chunk.to_vec())?);
            part += 1;
        } else {
            out.dropped_singletons += chunk.len();
        }
        start = i;
    }
    Ok(out)
}

/// A named floor-plan region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub name: String,
    pub polygon: Vec<Point2D>,
}

impl Region {
    pub fn new(name: impl Into<String>, polygon: Vec<Point2D>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(invalid("region name is empty"));
        }
        if polygon.iter().any(|p| !p.is_finite()) {
            return Err(invalid(format!("region {name} has a non-finite vertex")));
        }
        if !is_simple(&polygon) {
            return Err(invalid(format!(
                "region {name} polygon is not a simple polygon"
            )));
        }
        if signed_area(&polygon).abs() <= 0.0 {
            return Err(invalid(format!("region {name} has zero area")));
        }
        Ok(Self { name, polygon })
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.polygon).abs()
    }

    pub fn contains(&self, p: &Point2D) -> bool {
        point_in_polygon(p, &self.polygon)
    }
}

/// Named regions plus the implicit `other` catch-all, in canonical order
/// (configuration order, `other` last).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorPlan {
    regions: Vec<Region>,
    bounds: Option<BBox>,
}

impl FloorPlan {
    /// Build a plan from named regions. An `other` entry in `regions` is
    /// lifted out and used only as the catch-all; `bounds` defaults to the
    /// bounding box of all region vertices.
    pub fn new(regions: Vec<Region>, bounds: Option<BBox>) -> Result<Self> {
        let mut named = Vec::with_capacity(regions.len());
        let mut other_bounds = None;
        let mut seen = BTreeSet::new();
        for r in regions {
            if !seen.insert(r.name.clone()) {
                return Err(invalid(format!("duplicate region name {}", r.name)));
            }
            if r.name == OTHER_REGION {
                other_bounds = BBox::of_points(&r.polygon);
            } else {
                named.push(r);
            }
        }
        for i in 0..named.len() {
            for j in (i + 1)..named.len() {
                if polygons_overlap(&named[i].polygon, &named[j].polygon) {
                    return Err(Error::OverlappingRegions(
                        named[i].name.clone(),
                        named[j].name.clone(),
                    ));
                }
            }
        }
        let region_box = named
            .iter()
            .filter_map(|r| BBox::of_points(&r.polygon))
            .reduce(|a, b| a.union(&b));
        let bounds = match (bounds, other_bounds, region_box) {
            (Some(b), _, _) => Some(b),
            (None, Some(o), Some(r)) => Some(o.union(&r)),
            (None, o, r) => o.or(r),
        };
        if let Some(b) = bounds {
            if !(b.width() > 0.0 && b.height() > 0.0) {
                return Err(invalid("floor-plan bounds have zero extent"));
            }
        }
        let other = Region {
            name: OTHER_REGION.to_string(),
            polygon: bounds.map(|b| b.corners()).unwrap_or_default(),
        };
        named.push(other);
        Ok(Self {
            regions: named,
            bounds,
        })
    }

    /// All regions, `other` last.
    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn region_names(&self) -> Vec<&str> {
        self.regions.iter().map(|r| r.name.as_str()).collect()
    }

    pub fn region_index(&self, name: &str) -> Option<usize> {
        self.regions.iter().position(|r| r.name == name)
    }

    pub fn bounds(&self) -> Option<BBox> {
        self.bounds
    }

    /// Index of the first named region containing `p`, falling back to
    /// `other`.
    pub fn region_index_of(&self, p: &Point2D) -> usize {
        let named = self.regions.len() - 1;
        self.regions[..named]
            .iter()
            .position(|r| r.contains(p))
            .unwrap_or(named)
    }

    pub fn region_of(&self, p: &Point2D) -> &str {
        &self.regions[self.region_index_of(p)].name
    }

    /// The default seven-area layout: a 50 m x 34 m space (1,700 m^2) with
    /// gym, dining area, kitchen, lounge, activity area, tech bar and staff
    /// zone; corridors and unassigned floor fall in `other`.
    pub fn default_facility() -> FloorPlan {
        let rect = |name: &str, x0: f64, y0: f64, x1: f64, y1: f64| {
            Region::new(name, BBox::new(x0, y0, x1, y1).corners()).expect("static region")
        };
        FloorPlan::new(
            vec![
                rect("gym", 0.0, 0.0, 14.0, 12.0),
                rect("dining_area", 16.0, 0.0, 32.0, 12.0),
                rect("kitchen", 34.0, 0.0, 50.0, 12.0),
                rect("lounge", 0.0, 16.0, 14.0, 34.0),
                rect("activity_area", 16.0, 16.0, 32.0, 34.0),
                rect("tech_bar", 34.0, 16.0, 42.0, 26.0),
                rect("staff_zone", 44.0, 16.0, 50.0, 34.0),
            ],
            Some(BBox::new(0.0, 0.0, 50.0, 34.0)),
        )
        .expect("static plan")
    }
}

/// One break session with its person-tracks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakSession {
    pub session_id: String,
    pub cohort_id: String,
    pub duration_s: u32,
    pub trajectories: Vec<Trajectory>,
}

impl BreakSession {
    pub fn new(
        session_id: impl Into<String>,
        cohort_id: impl Into<String>,
        duration_s: u32,
        trajectories: Vec<Trajectory>,
    ) -> Result<Self> {
        let session = Self {
            session_id: session_id.into(),
            cohort_id: cohort_id.into(),
            duration_s,
            trajectories,
        };
        session.validate()?;
        Ok(session)
    }

    pub fn validate(&self) -> Result<()> {
        for traj in &self.trajectories {
            if let Some(last) = traj.samples().last() {
                if last.t >= self.duration_s {
                    return Err(invalid(format!(
                        "session {} track {} has sample t={} beyond duration {}",
                        self.session_id,
                        traj.track_id(),
                        last.t,
                        self.duration_s
                    )));
                }
            }
        }
        Ok(())
    }
}

/// A cohort and its members' MoCA scores.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cohort {
    pub cohort_id: String,
    pub moca_scores: Vec<u8>,
}

impl Cohort {
    pub fn new(cohort_id: impl Into<String>, moca_scores: Vec<u8>) -> Result<Self> {
        let cohort = Self {
            cohort_id: cohort_id.into(),
            moca_scores,
        };
        cohort.validate()?;
        Ok(cohort)
    }

    pub fn validate(&self) -> Result<()> {
        if self.moca_scores.is_empty() {
            return Err(invalid(format!(
                "cohort {} has no MoCA scores",
                self.cohort_id
            )));
        }
        if let Some(s) = self.moca_scores.iter().find(|&&s| s > 30) {
            return Err(invalid(format!(
                "cohort {} has MoCA score {s} outside [0, 30]",
                self.cohort_id
            )));
        }
        Ok(())
    }

    pub fn mean_score(&self) -> f64 {
        let sum: u32 = self.moca_scores.iter().map(|&s| u32::from(s)).sum();
        f64::from(sum) / self.moca_scores.len() as f64
    }
}

/// Cognitive-functioning class of a cohort. `Low` is the positive class for
/// every metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CohortLabel {
    High,
    Low,
}

impl CohortLabel {
    pub fn is_positive(self) -> bool {
        self == CohortLabel::Low
    }

    /// +1 for the positive (low functioning) class, -1 otherwise.
    pub fn sign(self) -> f64 {
        if self.is_positive() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn from_positive(positive: bool) -> Self {
        if positive {
            CohortLabel::Low
        } else {
            CohortLabel::High
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CohortLabel::High => "high",
            CohortLabel::Low => "low",
        }
    }
}

impl std::str::FromStr for CohortLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "high" => Ok(CohortLabel::High),
            "low" => Ok(CohortLabel::Low),
            other => Err(invalid(format!("unknown label {other:?}"))),
        }
    }
}

/// Label a cohort with the default cut point of 21.
pub fn label_cohort(cohort: &Cohort) -> Result<CohortLabel> {
    label_cohort_with_threshold(cohort, DEFAULT_MOCA_THRESHOLD)
}

/// High iff the arithmetic mean score strictly exceeds `threshold`.
pub fn label_cohort_with_threshold(cohort: &Cohort, threshold: f64) -> Result<CohortLabel> {
    cohort.validate()?;
    Ok(if cohort.mean_score() > threshold {
        CohortLabel::High
    } else {
        CohortLabel::Low
    })
}

/// Movement feature names in canonical order.
pub const MOVEMENT_FEATURES: [&str; 14] = [
    "lpl_mean",
    "lpl_std",
    "speed_mean",
    "speed_std",
    "direction_change_mean",
    "direction_change_std",
    "velocity_entropy_mean",
    "velocity_entropy_std",
    "orientation_entropy_mean",
    "orientation_entropy_std",
    "levy_mu_mean",
    "levy_mu_std",
    "levy_c_mean",
    "levy_c_std",
];

/// Which half of the feature vector a column belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSubset {
    All,
    Social,
    Movement,
}

impl FeatureSubset {
    pub const ALL: [FeatureSubset; 3] = [FeatureSubset::All, FeatureSubset::Social, FeatureSubset::Movement];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSubset::All => "all",
            FeatureSubset::Social => "social",
            FeatureSubset::Movement => "movement",
        }
    }
}

/// Column layout of a session feature vector: 14 movement features, then
/// mean/std of the overall normalised group count, then mean/std per region
/// in floor-plan order. With the default plan this is 14 + 18 = 32 columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    names: Vec<String>,
}

impl FeatureSchema {
    pub fn for_plan(plan: &FloorPlan) -> Self {
        Self::for_regions(&plan.region_names())
    }

    pub fn for_regions(regions: &[&str]) -> Self {
        let mut names: Vec<String> = MOVEMENT_FEATURES.iter().map(|s| s.to_string()).collect();
        names.push("groups_mean".into());
        names.push("groups_std".into());
        for r in regions {
            names.push(format!("groups_{r}_mean"));
            names.push(format!("groups_{r}_std"));
        }
        Self { names }
    }

    /// Rebuild from a stored column list, checking it has the canonical shape.
    pub fn from_names(names: Vec<String>) -> Result<Self> {
        let malformed = || invalid("feature columns are not in canonical order");
        if names.len() < MOVEMENT_FEATURES.len() + 2 || !(names.len() - MOVEMENT_FEATURES.len()).is_multiple_of(2) {
            return Err(malformed());
        }
        let regions: Vec<&str> = names[MOVEMENT_FEATURES.len() + 2..]
            .chunks(2)
            .map(|c| {
                c[0].strip_prefix("groups_")
                    .and_then(|s| s.strip_suffix("_mean"))
                    .ok_or_else(malformed)
            })
            .collect::<Result<_>>()?;
        let schema = Self::for_regions(&regions);
        if schema.names != names {
            return Err(malformed());
        }
        Ok(schema)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn movement_len(&self) -> usize {
        MOVEMENT_FEATURES.len()
    }

    pub fn social_len(&self) -> usize {
        self.names.len() - MOVEMENT_FEATURES.len()
    }

    /// Column indices belonging to `subset`.
    pub fn subset_indices(&self, subset: FeatureSubset) -> Vec<usize> {
        let m = MOVEMENT_FEATURES.len();
        match subset {
            FeatureSubset::All => (0..self.names.len()).collect(),
            FeatureSubset::Movement => (0..m).collect(),
            FeatureSubset::Social => (m..self.names.len()).collect(),
        }
    }
}

/// Feature vector of one session. `None` marks a masked (undefined) feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionFeatureVector {
    pub session_id: String,
    pub cohort_id: String,
    pub label: CohortLabel,
    pub values: Vec<Option<f64>>,
}

impl SessionFeatureVector {
    pub fn mask(&self) -> Vec<bool> {
        self.values.iter().map(Option::is_none).collect()
    }

    pub fn validate(&self, schema: &FeatureSchema) -> Result<()> {
        if self.values.len() != schema.len() {
            return Err(invalid(format!(
                "session {} has {} features, schema has {}",
                self.session_id,
                self.values.len(),
                schema.len()
            )));
        }
        if let Some(i) = self
            .values
            .iter()
            .position(|v| v.is_some_and(|x| !x.is_finite()))
        {
            return Err(invalid(format!(
                "session {} feature {} is not finite",
                self.session_id,
                schema.names()[i]
            )));
        }
        Ok(())
    }
}
