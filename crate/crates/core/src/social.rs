//! Frame-level group detection and the normalised group-count features.
//!
//! Two people are linked when they stand within `d_max` of each other and
//! each one that has an orientation faces within `facing_deg` of the bearing
//! toward the other. Groups are the connected components of size two or more,
//! placed in a region by their centroid. Short-lived groups are removed by
//! requiring the same member set on `min_persist_s` consecutive frames.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geometry::{angular_distance, Point2D};
use crate::model::{BreakSession, FloorPlan};
use crate::stats::descriptive;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SocialConfig {
    /// Maximum inter-person distance for a link, meters.
    pub d_max: f64,
    /// Maximum deviation between a person's orientation and the bearing to
    /// the partner, degrees.
    pub facing_deg: f64,
    /// Frames a member set must persist to count as a group.
    pub min_persist_s: u32,
    /// Use the movement heading when the tracker gave no body orientation.
    pub heading_fallback: bool,
    /// Minimum step length for a usable movement heading, meters.
    pub stationary_m: f64,
}

impl Default for SocialConfig {
    fn default() -> Self {
        Self {
            d_max: 2.0,
            facing_deg: 120.0,
            min_persist_s: 3,
            heading_fallback: true,
            stationary_m: 0.25,
        }
    }
}

/// One person at one instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonState {
    pub track_id: String,
    pub position: Point2D,
    /// Degrees counter-clockwise from +x; absent when unknown.
    pub orientation: Option<f64>,
}

impl PersonState {
    pub fn new(track_id: impl Into<String>, position: Point2D, orientation: Option<f64>) -> Self {
        Self {
            track_id: track_id.into(),
            position,
            orientation,
        }
    }
}

/// A detected group at one timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupFormation {
    pub t: u32,
    /// Sorted, at least two ids.
    pub member_ids: Vec<String>,
    pub centroid: Point2D,
    pub region: String,
}

impl GroupFormation {
    pub fn size(&self) -> usize {
        self.member_ids.len()
    }
}

/// All groups detected at one timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub t: u32,
    /// People present in the frame.
    pub present: usize,
    pub groups: Vec<GroupFormation>,
}

fn faces(from: &PersonState, to: &PersonState, facing_deg: f64) -> bool {
    match from.orientation {
        None => true,
        Some(o) => angular_distance(o, from.position.bearing_to(&to.position)) <= facing_deg,
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Detect groups among the people of one frame.
pub fn detect_groups(t: u32, people: &[PersonState], plan: &FloorPlan, config: &SocialConfig) -> Vec<GroupFormation> {
    let n = people.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (&people[i], &people[j]);
            if a.position.distance(&b.position) <= config.d_max
                && faces(a, b, config.facing_deg)
                && faces(b, a, config.facing_deg)
            {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut components: BTreeMap<usize, Vec<&PersonState>> = BTreeMap::new();
    for i in 0..n {
        let root = find(&mut parent, i);
        components.entry(root).or_default().push(&people[i]);
    }
    let mut groups: Vec<GroupFormation> = components
        .into_values()
        .filter(|members| members.len() >= 2)
        .map(|mut members| {
            members.sort_by(|a, b| a.track_id.cmp(&b.track_id));
            let positions: Vec<Point2D> = members.iter().map(|m| m.position).collect();
            let centroid = Point2D::centroid(&positions).expect("non-empty group");
            GroupFormation {
                t,
                member_ids: members.iter().map(|m| m.track_id.clone()).collect(),
                region: plan.region_of(&centroid).to_string(),
                centroid,
            }
        })
        .collect();
    groups.sort_by(|a, b| a.member_ids.cmp(&b.member_ids));
    groups
}

/// Keep only groups whose exact member set appears on at least
/// `min_persist_s` consecutive seconds.
pub fn smooth_groups(frames: &[Frame], min_persist_s: u32) -> Vec<Frame> {
    if min_persist_s <= 1 {
        return frames.to_vec();
    }
    let mut occurrences: BTreeMap<&[String], Vec<(usize, usize)>> = BTreeMap::new();
    for (fi, frame) in frames.iter().enumerate() {
        for (gi, g) in frame.groups.iter().enumerate() {
            occurrences.entry(&g.member_ids).or_default().push((fi, gi));
        }
    }
    let mut keep: Vec<Vec<bool>> = frames.iter().map(|f| vec![false; f.groups.len()]).collect();
    for occ in occurrences.values() {
        let mut run_start = 0;
        for k in 1..=occ.len() {
            let continues = k < occ.len() && frames[occ[k].0].t == frames[occ[k - 1].0].t + 1;
            if continues {
                continue;
            }
            if (k - run_start) as u32 >= min_persist_s {
                for &(fi, gi) in &occ[run_start..k] {
                    keep[fi][gi] = true;
                }
            }
            run_start = k;
        }
    }
    frames
        .iter()
        .zip(keep)
        .map(|(frame, keep)| Frame {
            t: frame.t,
            present: frame.present,
            groups: frame
                .groups
                .iter()
                .zip(keep)
                .filter(|(_, k)| *k)
                .map(|(g, _)| g.clone())
                .collect(),
        })
        .collect()
}

/// Groups per participating person, `g / n`; undefined when nobody is in a
/// group.
pub fn normalized_group_count(groups: usize, participants: usize) -> Option<f64> {
    if participants == 0 {
        None
    } else {
        Some(groups as f64 / participants as f64)
    }
}

/// People present at each second of the session, with orientation taken from
/// the tracker or, failing that, from the movement heading.
pub fn session_people(session: &BreakSession, config: &SocialConfig) -> Vec<Vec<PersonState>> {
    let mut frames: Vec<Vec<PersonState>> = vec![Vec::new(); session.duration_s as usize];
    for traj in &session.trajectories {
        let samples = traj.samples();
        let heading = |a: usize, b: usize| {
            let (p, q) = (samples[a].position, samples[b].position);
            (p.distance(&q) >= config.stationary_m && p.distance(&q) > 0.0)
                .then(|| crate::geometry::normalize_degrees(p.bearing_to(&q)))
        };
        for (i, s) in samples.iter().enumerate() {
            let orientation = s.orientation.or_else(|| {
                if !config.heading_fallback {
                    return None;
                }
                let before = (i > 0).then(|| heading(i - 1, i)).flatten();
                before.or_else(|| (i + 1 < samples.len()).then(|| heading(i, i + 1)).flatten())
            });
            if let Some(slot) = frames.get_mut(s.t as usize) {
                slot.push(PersonState::new(traj.track_id(), s.position, orientation));
            }
        }
    }
    frames
}

/// Detected and smoothed groups for every second of a session.
pub fn session_frames(session: &BreakSession, plan: &FloorPlan, config: &SocialConfig) -> Vec<Frame> {
    let raw: Vec<Frame> = session_people(session, config)
        .into_iter()
        .enumerate()
        .map(|(t, people)| Frame {
            t: t as u32,
            present: people.len(),
            groups: detect_groups(t as u32, &people, plan, config),
        })
        .collect();
    smooth_groups(&raw, config.min_persist_s)
}

/// Per-frame values behind the social features.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SocialPools {
    /// Overall `G_t` for frames with at least one group.
    pub overall: Vec<f64>,
    /// Per-region `G^r_t`, in floor-plan region order.
    pub by_region: Vec<Vec<f64>>,
    /// Raw group count `g_t` on every frame with someone present.
    pub group_counts: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocialFeatures {
    /// Overall mean/std, then mean/std per region.
    pub values: Vec<Option<f64>>,
    pub pools: SocialPools,
}

/// Per-frame counts from already smoothed frames.
pub fn social_features_from_frames(frames: &[Frame], plan: &FloorPlan) -> SocialFeatures {
    let regions = plan.regions().len();
    let mut pools = SocialPools {
        by_region: vec![Vec::new(); regions],
        ..SocialPools::default()
    };
    for frame in frames {
        if frame.present > 0 {
            pools.group_counts.push(frame.groups.len() as f64);
        }
        let participants: usize = frame.groups.iter().map(GroupFormation::size).sum();
        pools.overall.extend(normalized_group_count(frame.groups.len(), participants));
        let mut g = vec![0usize; regions];
        let mut n = vec![0usize; regions];
        for group in &frame.groups {
            let r = plan
                .region_index(&group.region)
                .expect("group region comes from the plan");
            g[r] += 1;
            n[r] += group.size();
        }
        for r in 0..regions {
            pools.by_region[r].extend(normalized_group_count(g[r], n[r]));
        }
    }
    let mut values = Vec::with_capacity(2 + 2 * regions);
    for pool in std::iter::once(&pools.overall).chain(pools.by_region.iter()) {
        match descriptive(pool) {
            Some((mean, sd)) => values.extend([Some(mean), Some(sd)]),
            None => values.extend([None, None]),
        }
    }
    SocialFeatures { values, pools }
}

/// The social features of a session: mean/std of overall `G_t`, then of each
/// region's `G^r_t`. Regions without any group in the session are masked.
pub fn social_features(session: &BreakSession, plan: &FloorPlan, config: &SocialConfig) -> SocialFeatures {
    social_features_from_frames(&session_frames(session, plan, config), plan)
}
