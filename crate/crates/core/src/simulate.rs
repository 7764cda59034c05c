//! Synthetic break sessions for two behavioural profiles.
//!
//! Walkers chain straight flights (length from the step-length model,
//! constant speed per flight, small per-step heading wobble), reorient at the
//! end of each flight, pause at random and now and then gather in groups
//! around a shared centre. Observation noise is added afterwards.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{normalize_degrees, BBox, Point2D};
use crate::ingest::{Manifest, SessionEntry};
use crate::learn::derive_seed;
use crate::model::{split_on_gaps, BreakSession, Cohort, CohortLabel, FloorPlan, TrackSample, OTHER_REGION};

/// Distribution of flight lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepLengthModel {
    Levy { mu: f64, c: f64 },
    Gaussian { mean: f64, std: f64 },
}

impl StepLengthModel {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            StepLengthModel::Levy { mu, c } => mu >= 0.0 && c > 0.0 && mu.is_finite() && c.is_finite(),
            StepLengthModel::Gaussian { mean, std } => mean > 0.0 && std >= 0.0 && mean.is_finite() && std.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid("step-length model parameters out of range"))
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            StepLengthModel::Levy { mu, c } => {
                let z: f64 = StandardNormal.sample(rng);
                mu + c / (z * z).max(1e-12)
            }
            StepLengthModel::Gaussian { mean, std } => mean + std * rng.sample::<f64, _>(StandardNormal),
        }
    }
}

/// Walking speed in m/s: one draw per flight, truncated below at
/// [`SpeedModel::MIN`], times a per-step factor `1 + step_jitter * N(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedModel {
    pub mean: f64,
    pub std: f64,
    #[serde(default)]
    pub step_jitter: f64,
}

impl SpeedModel {
    pub const MIN: f64 = 0.1;

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        for _ in 0..64 {
            let v = self.mean + self.std * rng.sample::<f64, _>(StandardNormal);
            if v > Self::MIN {
                return v;
            }
        }
        self.mean.max(Self::MIN * 2.0)
    }

    fn step(&self, flight_speed: f64, rng: &mut impl Rng) -> f64 {
        if self.step_jitter > 0.0 {
            (flight_speed * (1.0 + self.step_jitter * rng.sample::<f64, _>(StandardNormal))).max(Self::MIN)
        } else {
            flight_speed
        }
    }
}

/// Heading changes: gaussian wobble on every step plus a reorientation of
/// uniform magnitude in `[reorient_min_deg, reorient_max_deg]` (random sign)
/// whenever a flight ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurnModel {
    pub sigma_deg: f64,
    pub reorient_min_deg: f64,
    pub reorient_max_deg: f64,
}

impl TurnModel {
    pub const ZERO: TurnModel = TurnModel {
        sigma_deg: 0.0,
        reorient_min_deg: 0.0,
        reorient_max_deg: 0.0,
    };

    fn reorientation(&self, rng: &mut impl Rng) -> f64 {
        let mag = if self.reorient_max_deg > self.reorient_min_deg {
            rng.random_range(self.reorient_min_deg..self.reorient_max_deg)
        } else {
            self.reorient_min_deg
        };
        if rng.random_bool(0.5) {
            mag
        } else {
            -mag
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortProfile {
    pub label: CohortLabel,
    pub step_length: StepLengthModel,
    /// Flight lengths above this are redrawn.
    pub max_flight_m: f64,
    pub speed: SpeedModel,
    pub turn: TurnModel,
    /// Chance per walking step of stopping.
    pub pause_prob: f64,
    pub pause_mean_s: f64,
    /// Rate at which a free person starts a group event, per minute.
    pub group_rate_per_min: f64,
    /// Relative weights of group sizes 2, 3, 4, ...
    pub group_size_weights: Vec<f64>,
    pub group_dwell_mean_s: f64,
    /// Region name to weight; empty means uniform over named regions.
    pub region_weights: BTreeMap<String, f64>,
}

impl CohortProfile {
    pub fn default_high() -> Self {
        CohortProfile {
            label: CohortLabel::High,
            step_length: StepLengthModel::Levy { mu: 0.5, c: 1.2 },
            max_flight_m: 25.0,
            speed: SpeedModel {
                mean: 1.2,
                std: 0.3,
                step_jitter: 0.0,
            },
            turn: TurnModel {
                sigma_deg: 4.0,
                reorient_min_deg: 30.0,
                reorient_max_deg: 180.0,
            },
            pause_prob: 0.02,
            pause_mean_s: 20.0,
            group_rate_per_min: 0.35,
            group_size_weights: vec![0.4, 0.35, 0.25],
            group_dwell_mean_s: 90.0,
            region_weights: BTreeMap::new(),
        }
    }

    pub fn default_low() -> Self {
        CohortProfile {
            label: CohortLabel::Low,
            step_length: StepLengthModel::Gaussian { mean: 6.0, std: 3.0 },
            speed: SpeedModel {
                mean: 0.85,
                std: 0.3,
                step_jitter: 0.25,
            },
            turn: TurnModel {
                sigma_deg: 15.0,
                ..CohortProfile::default_high().turn
            },
            group_rate_per_min: 0.18,
            group_size_weights: vec![0.7, 0.2, 0.1],
            ..CohortProfile::default_high()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.step_length.validate()?;
        let positive = |v: f64| v > 0.0 && v.is_finite();
        let prob = |v: f64| (0.0..=1.0).contains(&v);
        if !positive(self.max_flight_m) || !positive(self.pause_mean_s) || !positive(self.group_dwell_mean_s) {
            return Err(invalid("profile scale parameters must be positive"));
        }
        if !positive(self.speed.mean) || !(self.speed.std >= 0.0) || !(self.speed.step_jitter >= 0.0) {
            return Err(invalid("speed model parameters out of range"));
        }
        let t = &self.turn;
        if !(t.sigma_deg >= 0.0 && t.reorient_min_deg >= 0.0 && t.reorient_max_deg >= t.reorient_min_deg && t.reorient_max_deg <= 180.0) {
            return Err(invalid("turn model parameters out of range"));
        }
        if !prob(self.pause_prob) {
            return Err(invalid("pause probability must be in [0, 1]"));
        }
        if !(self.group_rate_per_min >= 0.0 && self.group_rate_per_min <= 60.0) {
            return Err(invalid("group rate must be in [0, 60] per minute"));
        }
        if self.group_size_weights.is_empty() || self.group_size_weights.iter().any(|w| !(*w >= 0.0)) || self.group_size_weights.iter().sum::<f64>() <= 0.0 {
            return Err(invalid("group size weights must be non-negative with a positive sum"));
        }
        if !self.region_weights.is_empty() {
            let sum: f64 = self.region_weights.values().sum();
            if self.region_weights.values().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > 1e-6 {
                return Err(invalid("region weights must be non-negative and sum to 1"));
            }
        }
        Ok(())
    }
}

/// Observation noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// Per-axis standard deviation of the position error.
    pub localization_sigma_m: f64,
    pub orientation_sigma_deg: f64,
    pub dropout: f64,
    /// Spatial correlation length of the position error; 0 gives white
    /// noise, independent per sample.
    pub correlation_length_m: f64,
}

impl NoiseModel {
    pub const NONE: NoiseModel = NoiseModel {
        localization_sigma_m: 0.0,
        orientation_sigma_deg: 0.0,
        dropout: 0.0,
        correlation_length_m: 0.0,
    };

    /// Noise whose mean radial and mean absolute angular errors equal the
    /// given values.
    pub fn from_mean_errors(radial_m: f64, angular_deg: f64) -> Self {
        let half_pi = std::f64::consts::FRAC_PI_2;
        NoiseModel {
            localization_sigma_m: radial_m / half_pi.sqrt(),
            orientation_sigma_deg: angular_deg / (1.0 / half_pi).sqrt(),
            ..NoiseModel::NONE
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.localization_sigma_m >= 0.0 && self.orientation_sigma_deg >= 0.0 && self.correlation_length_m >= 0.0) {
            return Err(invalid("noise scales must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(invalid("dropout must be in [0, 1)"));
        }
        Ok(())
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            dropout: 0.02,
            correlation_length_m: 10.0,
            ..NoiseModel::from_mean_errors(1.41, 29.0)
        }
    }
}

/// Position error as a function of true location: a sum of random cosine
/// modes (Gaussian spectrum), independent per axis, so the error varies
/// smoothly over `correlation_length_m` and has per-axis standard deviation
/// `sigma`. One field is shared by everyone in a session.
pub struct ErrorField {
    sigma: f64,
    white: bool,
    modes: [Vec<(f64, f64, f64)>; 2],
}

impl ErrorField {
    const MODES: usize = 64;

    pub fn new(noise: &NoiseModel, rng: &mut impl Rng) -> Self {
        let white = noise.correlation_length_m <= 0.0;
        let mut modes = [Vec::new(), Vec::new()];
        if !white && noise.localization_sigma_m > 0.0 {
            let k_sd = 1.0 / noise.correlation_length_m;
            for axis in &mut modes {
                *axis = (0..Self::MODES)
                    .map(|_| {
                        let kx = k_sd * rng.sample::<f64, _>(StandardNormal);
                        let ky = k_sd * rng.sample::<f64, _>(StandardNormal);
                        (kx, ky, rng.random_range(0.0..std::f64::consts::TAU))
                    })
                    .collect();
            }
        }
        ErrorField {
            sigma: noise.localization_sigma_m,
            white,
            modes,
        }
    }

    /// Error at `p`; white fields draw a fresh error from `rng` instead.
    pub fn error(&self, p: &Point2D, rng: &mut impl Rng) -> (f64, f64) {
        if self.sigma == 0.0 {
            return (0.0, 0.0);
        }
        if self.white {
            let mut draw = || self.sigma * rng.sample::<f64, _>(StandardNormal);
            return (draw(), draw());
        }
        let amp = self.sigma * (2.0 / Self::MODES as f64).sqrt();
        let eval = |axis: &[(f64, f64, f64)]| axis.iter().map(|&(kx, ky, ph)| (kx * p.x + ky * p.y + ph).cos()).sum::<f64>() * amp;
        (eval(&self.modes[0]), eval(&self.modes[1]))
    }
}

fn quantize(v: f64, step: f64) -> f64 {
    (v / step).round() * step
}

#[derive(Debug, Clone, Copy)]
enum Mode {
    Flight { steps_left: u32 },
    Pause { left: u32 },
    Group { event: usize, slot: Point2D, arrived: bool },
}

struct Agent<'a> {
    profile: &'a CohortProfile,
    pos: Point2D,
    heading: f64,
    speed: f64,
    facing: f64,
    mode: Mode,
}

struct GroupEvent {
    center: Point2D,
    members: Vec<usize>,
    dwell: u32,
    end: Option<u32>,
}

struct World<'a> {
    inner: BBox,
    plan: &'a FloorPlan,
}

fn step_toward(from: Point2D, heading_deg: f64, dist: f64) -> Point2D {
    let h = heading_deg.to_radians();
    from.offset(dist * h.cos(), dist * h.sin())
}

impl Agent<'_> {
    fn start_flight(&mut self, rng: &mut impl Rng) {
        let p = self.profile;
        let mut length = p.step_length.sample(rng);
        for _ in 0..64 {
            if length > 0.0 && length <= p.max_flight_m {
                break;
            }
            length = p.step_length.sample(rng);
        }
        let length = length.clamp(0.0, p.max_flight_m);
        self.speed = p.speed.sample(rng);
        let steps = ((length / self.speed).round() as u32).max(1);
        self.mode = Mode::Flight { steps_left: steps };
    }

    fn pause(&mut self, rng: &mut impl Rng) {
        let mean = self.profile.pause_mean_s;
        let left = Exp::new(1.0 / mean).map_or(1.0, |d| d.sample(rng)).ceil().max(1.0) as u32;
        self.mode = Mode::Pause { left };
    }

    /// End of a flight: turn, then walk on unless the new heading leaves the
    /// floor, in which case wait a second.
    fn reorient(&mut self, world: &World, rng: &mut impl Rng) {
        self.heading = normalize_degrees(self.heading + self.profile.turn.reorientation(rng));
        self.start_flight(rng);
        if !world.inner.contains(&step_toward(self.pos, self.heading, self.speed)) {
            self.mode = Mode::Pause { left: 1 };
        }
    }

    fn advance(&mut self, world: &World, rng: &mut impl Rng) {
        match self.mode {
            Mode::Pause { left } => {
                if left <= 1 {
                    self.reorient(world, rng);
                } else {
                    self.mode = Mode::Pause { left: left - 1 };
                }
            }
            Mode::Flight { steps_left } => {
                let sigma = self.profile.turn.sigma_deg;
                let heading = if sigma > 0.0 {
                    self.heading + sigma * rng.sample::<f64, _>(StandardNormal)
                } else {
                    self.heading
                };
                let next = step_toward(self.pos, heading, self.profile.speed.step(self.speed, rng));
                if !world.inner.contains(&next) {
                    self.reorient(world, rng);
                    return;
                }
                self.pos = next;
                self.heading = normalize_degrees(heading);
                self.facing = self.heading;
                if self.profile.pause_prob > 0.0 && rng.random_bool(self.profile.pause_prob) {
                    self.pause(rng);
                } else if steps_left <= 1 {
                    self.reorient(world, rng);
                } else {
                    self.mode = Mode::Flight { steps_left: steps_left - 1 };
                }
            }
            Mode::Group { .. } => {}
        }
    }
}

fn weighted_index(weights: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// A random point at least `margin` inside the region's bounding box that
/// lies in the region itself.
fn point_in_region(plan: &FloorPlan, region: usize, margin: f64, rng: &mut impl Rng) -> Point2D {
    let r = &plan.regions()[region];
    let bbox = BBox::of_points(&r.polygon).expect("regions have vertices");
    let inner = if bbox.width() > 2.0 * margin && bbox.height() > 2.0 * margin {
        bbox.inflate(-margin)
    } else {
        bbox
    };
    for _ in 0..256 {
        let p = Point2D::new(rng.random_range(inner.min_x..=inner.max_x), rng.random_range(inner.min_y..=inner.max_y));
        if r.contains(&p) && plan.region_index_of(&p) == region {
            return p;
        }
    }
    Point2D::centroid(&r.polygon).expect("regions have vertices")
}

fn group_region(profile: &CohortProfile, plan: &FloorPlan, rng: &mut impl Rng) -> usize {
    let named: Vec<usize> = (0..plan.regions().len()).filter(|&i| plan.regions()[i].name != OTHER_REGION).collect();
    if profile.region_weights.is_empty() {
        if named.is_empty() {
            return plan.regions().len() - 1;
        }
        return named[rng.random_range(0..named.len())];
    }
    let entries: Vec<(usize, f64)> = profile
        .region_weights
        .iter()
        .filter_map(|(name, &w)| plan.region_index(name).map(|i| (i, w)))
        .collect();
    let weights: Vec<f64> = entries.iter().map(|e| e.1).collect();
    if weights.iter().sum::<f64>() <= 0.0 {
        return plan.regions().len() - 1;
    }
    entries[weighted_index(&weights, rng)].0
}

/// Who takes part in a simulated session.
#[derive(Debug, Clone, Copy)]
pub struct Population<'a> {
    pub profile: &'a CohortProfile,
    /// Profile for companions, who share the space regardless of label.
    pub companion: &'a CohortProfile,
    pub companion_fraction: f64,
}

/// Ground-truth 1 Hz positions and orientations of every person.
type TruePaths = Vec<Vec<(Point2D, f64)>>;

fn simulate_truth(population: &Population, plan: &FloorPlan, duration_s: u32, n_people: usize, rng: &mut ChaCha8Rng) -> Result<TruePaths> {
    let bounds = plan.bounds().ok_or_else(|| invalid("floor plan needs bounds to simulate"))?;
    let margin = 0.5_f64.min(bounds.width() / 4.0).min(bounds.height() / 4.0);
    let world = World {
        inner: bounds.inflate(-margin),
        plan,
    };
    let companions = (n_people as f64 * population.companion_fraction).round() as usize;
    let mut agents: Vec<Agent> = (0..n_people)
        .map(|i| {
            let profile = if i >= n_people - companions.min(n_people) {
                population.companion
            } else {
                population.profile
            };
            let pos = Point2D::new(
                rng.random_range(world.inner.min_x..=world.inner.max_x),
                rng.random_range(world.inner.min_y..=world.inner.max_y),
            );
            let heading = rng.random_range(0.0..360.0);
            let mut a = Agent {
                profile,
                pos,
                heading,
                speed: profile.speed.mean,
                facing: heading,
                mode: Mode::Pause { left: 1 },
            };
            a.start_flight(rng);
            a
        })
        .collect();
    let mut events: Vec<GroupEvent> = Vec::new();
    let mut paths: TruePaths = vec![Vec::with_capacity(duration_s as usize); n_people];

    for t in 0..duration_s {
        for (i, a) in agents.iter().enumerate() {
            paths[i].push((a.pos, a.facing));
        }
        // finished group events release their members
        for e in events.iter_mut() {
            if e.end == Some(t) {
                for &m in &e.members {
                    agents[m].heading = rng.random_range(0.0..360.0);
                    agents[m].reorient(&world, rng);
                }
                e.end = None;
                e.members.clear();
            }
        }
        // new group events
        for i in 0..n_people {
            if matches!(agents[i].mode, Mode::Group { .. }) {
                continue;
            }
            let p = agents[i].profile;
            if p.group_rate_per_min <= 0.0 || !rng.random_bool((p.group_rate_per_min / 60.0).min(1.0)) {
                continue;
            }
            let mut free: Vec<usize> = (0..n_people)
                .filter(|&j| j != i && !matches!(agents[j].mode, Mode::Group { .. }))
                .collect();
            if free.is_empty() {
                continue;
            }
            let size = (weighted_index(&p.group_size_weights, rng) + 2).min(free.len() + 1);
            let mut members = vec![i];
            for _ in 1..size {
                members.push(free.swap_remove(rng.random_range(0..free.len())));
            }
            let region = group_region(p, world.plan, rng);
            let center = world.inner.clamp(point_in_region(world.plan, region, 1.5, rng));
            let radius = rng.random_range(0.5..=1.0);
            let phase = rng.random_range(0.0..360.0);
            let dwell = Exp::new(1.0 / p.group_dwell_mean_s).map_or(1.0, |d| d.sample(rng)).ceil().max(1.0) as u32;
            let event = events.len();
            for (k, &m) in members.iter().enumerate() {
                let angle = phase + 360.0 * k as f64 / members.len() as f64;
                let slot = world.inner.clamp(step_toward(center, angle, radius));
                agents[m].mode = Mode::Group {
                    event,
                    slot,
                    arrived: false,
                };
            }
            events.push(GroupEvent {
                center,
                members,
                dwell,
                end: None,
            });
        }
        // movement
        for a in agents.iter_mut() {
            if let Mode::Group { event, slot, arrived } = a.mode {
                let center = events[event].center;
                if arrived {
                    a.facing = a.pos.bearing_to(&center);
                } else {
                    let d = a.pos.distance(&slot);
                    if d <= a.speed {
                        a.pos = slot;
                        a.facing = normalize_degrees(slot.bearing_to(&center));
                        a.mode = Mode::Group { event, slot, arrived: true };
                    } else {
                        a.heading = normalize_degrees(a.pos.bearing_to(&slot));
                        a.facing = a.heading;
                        a.pos = step_toward(a.pos, a.heading, a.speed);
                    }
                }
            } else {
                a.advance(&world, rng);
            }
        }
        // dwell starts once everyone has arrived
        for e in events.iter_mut() {
            if e.end.is_none()
                && !e.members.is_empty()
                && e.members.iter().all(|&m| matches!(agents[m].mode, Mode::Group { arrived: true, .. }))
            {
                e.end = Some(t + 1 + e.dwell);
            }
        }
    }
    Ok(paths)
}

/// Apply noise and dropout, then split into trajectories the way ingestion
/// would.
fn observe(paths: &TruePaths, plan: &FloorPlan, noise: &NoiseModel, max_gap_s: u32, rng: &mut ChaCha8Rng) -> Result<Vec<crate::model::Trajectory>> {
    let bounds = plan.bounds().ok_or_else(|| invalid("floor plan needs bounds to simulate"))?;
    let width = (paths.len().max(1) as f64).log10().floor() as usize + 1;
    let mut out = Vec::new();
    let field = ErrorField::new(noise, rng);
    for (i, path) in paths.iter().enumerate() {
        let mut samples = Vec::with_capacity(path.len());
        for (t, &(pos, facing)) in path.iter().enumerate() {
            let (ex, ey) = field.error(&pos, rng);
            let o_err = if noise.orientation_sigma_deg > 0.0 {
                noise.orientation_sigma_deg * rng.sample::<f64, _>(StandardNormal)
            } else {
                0.0
            };
            if noise.dropout > 0.0 && rng.random_bool(noise.dropout) {
                continue;
            }
            let p = bounds.clamp(pos.offset(ex, ey));
            let p = Point2D::new(quantize(p.x, 1e-3), quantize(p.y, 1e-3));
            let o = normalize_degrees(quantize(normalize_degrees(facing + o_err), 0.1));
            samples.push(TrackSample::new(t as u32, p, Some(o)));
        }
        let id = format!("p{:0width$}", i + 1);
        out.extend(split_on_gaps(&id, &samples, max_gap_s)?.trajectories);
    }
    out.sort_by(|a, b| a.track_id().cmp(b.track_id()));
    Ok(out)
}

/// One simulated session; ids and gap splitting match what ingestion of the
/// written tracks produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionSpec {
    pub session_id: String,
    pub cohort_id: String,
    pub duration_s: u32,
    pub n_people: usize,
}

pub fn simulate_population_session(
    population: &Population,
    plan: &FloorPlan,
    spec: &SessionSpec,
    noise: &NoiseModel,
    seed: u64,
) -> Result<BreakSession> {
    population.profile.validate()?;
    population.companion.validate()?;
    noise.validate()?;
    if !(0.0..=1.0).contains(&population.companion_fraction) {
        return Err(invalid("companion fraction must be in [0, 1]"));
    }
    if spec.n_people == 0 {
        return Err(invalid("a session needs at least one person"));
    }
    if spec.duration_s < 2 {
        return Err(invalid("session duration must be at least 2 s"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = simulate_truth(population, plan, spec.duration_s, spec.n_people, &mut rng)?;
    let trajectories = observe(&truth, plan, noise, crate::ingest::IngestOptions::default().max_gap_s, &mut rng)?;
    BreakSession::new(spec.session_id.clone(), spec.cohort_id.clone(), spec.duration_s, trajectories)
}

/// Session in which everyone follows `profile`.
pub fn simulate_session(
    profile: &CohortProfile,
    plan: &FloorPlan,
    duration_s: u32,
    n_people: usize,
    noise: &NoiseModel,
    seed: u64,
) -> Result<BreakSession> {
    let population = Population {
        profile,
        companion: profile,
        companion_fraction: 0.0,
    };
    let spec = SessionSpec {
        session_id: "s0001".into(),
        cohort_id: "sim".into(),
        duration_s,
        n_people,
    };
    simulate_population_session(&population, plan, &spec, noise, seed)
}

/// Six cohorts: A, C and E above the MoCA cut, B, D and F below it.
pub fn six_cohort_fixture() -> Vec<Cohort> {
    let make = |id: &str, n: usize, base: [u8; 4]| {
        let scores = (0..n).map(|i| base[i % 4]).collect();
        Cohort::new(id, scores).expect("static cohort")
    };
    vec![
        make("A", 11, [23, 25, 21, 24]),
        make("B", 7, [18, 20, 16, 21]),
        make("C", 12, [22, 26, 24, 20]),
        make("D", 10, [19, 17, 21, 15]),
        make("E", 13, [27, 22, 24, 23]),
        make("F", 13, [20, 14, 18, 22]),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyOptions {
    pub high_sessions: usize,
    pub low_sessions: usize,
    pub people_min: usize,
    pub people_max: usize,
    /// Every third session is long, the rest short.
    pub short_duration_s: u32,
    pub long_duration_s: u32,
    pub companion_fraction: f64,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            high_sessions: 80,
            low_sessions: 80,
            people_min: 6,
            people_max: 12,
            short_duration_s: 900,
            long_duration_s: 1800,
            companion_fraction: 0.3,
        }
    }
}

impl StudyOptions {
    pub fn validate(&self) -> Result<()> {
        if self.high_sessions == 0 || self.low_sessions == 0 {
            return Err(invalid("each class needs at least one session"));
        }
        if self.people_min == 0 || self.people_max < self.people_min {
            return Err(invalid("people range must satisfy 1 <= min <= max"));
        }
        if self.short_duration_s < 2 || self.long_duration_s < 2 {
            return Err(invalid("session durations must be at least 2 s"));
        }
        if !(0.0..=1.0).contains(&self.companion_fraction) {
            return Err(invalid("companion fraction must be in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    pub manifest: Manifest,
    pub sessions: Vec<BreakSession>,
}

/// Simulate labelled sessions for both profiles. High sessions rotate over
/// the fixture's high cohorts and low sessions over its low cohorts; every
/// session has its own derived seed.
pub fn simulate_study(
    high: &CohortProfile,
    low: &CohortProfile,
    options: &StudyOptions,
    plan: &FloorPlan,
    noise: &NoiseModel,
    seed: u64,
) -> Result<Study> {
    options.validate()?;
    high.validate()?;
    low.validate()?;
    noise.validate()?;
    if high.label != CohortLabel::High || low.label != CohortLabel::Low {
        return Err(invalid("profiles must be labelled high and low respectively"));
    }
    let cohorts = six_cohort_fixture();
    let ids_for = |label: CohortLabel| -> Vec<String> {
        cohorts
            .iter()
            .filter(|c| crate::model::label_cohort(c).ok() == Some(label))
            .map(|c| c.cohort_id.clone())
            .collect()
    };
    let (high_ids, low_ids) = (ids_for(CohortLabel::High), ids_for(CohortLabel::Low));
    let total = options.high_sessions + options.low_sessions;
    let mut plans = Vec::with_capacity(total);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..total {
        let (profile, ids, j) = if k < options.high_sessions {
            (high, &high_ids, k)
        } else {
            (low, &low_ids, k - options.high_sessions)
        };
        let duration_s = if k % 3 == 2 { options.long_duration_s } else { options.short_duration_s };
        let spec = SessionSpec {
            session_id: format!("s{:04}", k + 1),
            cohort_id: ids[j % ids.len()].clone(),
            duration_s,
            n_people: rng.random_range(options.people_min..=options.people_max),
        };
        plans.push((profile, spec));
    }
    let sessions = plans
        .par_iter()
        .enumerate()
        .map(|(k, (profile, spec))| {
            let population = Population {
                profile,
                companion: high,
                companion_fraction: options.companion_fraction,
            };
            simulate_population_session(&population, plan, spec, noise, derive_seed(seed, k as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let entries = plans
        .iter()
        .enumerate()
        .map(|(k, (_, spec))| SessionEntry {
            session_id: spec.session_id.clone(),
            cohort_id: spec.cohort_id.clone(),
            date: format!("2024-{:02}-{:02}", 1 + (k / 3 / 28) % 12, 1 + (k / 3) % 28),
            duration_s: spec.duration_s,
        })
        .collect();
    let manifest = Manifest::new(cohorts, entries)?;
    Ok(Study { manifest, sessions })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_labels() {
        let labels: Vec<_> = six_cohort_fixture().iter().map(|c| crate::model::label_cohort(c).unwrap()).collect();
        use CohortLabel::{High, Low};
        assert_eq!(labels, vec![High, Low, High, Low, High, Low]);
        let sizes: Vec<_> = six_cohort_fixture().iter().map(|c| c.moca_scores.len()).collect();
        assert_eq!(sizes, vec![11, 7, 12, 10, 13, 13]);
    }

    #[test]
    fn default_noise_constants() {
        let n = NoiseModel::default();
        assert!((n.localization_sigma_m - 1.125).abs() < 1e-3);
        assert!((n.orientation_sigma_deg - 36.35).abs() < 0.01);
    }

    #[test]
    fn profiles_validate() {
        CohortProfile::default_high().validate().unwrap();
        CohortProfile::default_low().validate().unwrap();
        let mut bad = CohortProfile::default_high();
        bad.pause_prob = 1.5;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn same_seed_same_session() {
        let plan = FloorPlan::default_facility();
        let p = CohortProfile::default_low();
        let a = simulate_session(&p, &plan, 900, 5, &NoiseModel::default(), 3).unwrap();
        let b = simulate_session(&p, &plan, 900, 5, &NoiseModel::default(), 3).unwrap();
        assert_eq!(a, b);
        assert!(!a.trajectories.is_empty());
    }
}
