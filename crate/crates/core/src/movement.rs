//! Movement features: linear-path segmentation, walking speed, direction
//! change, velocity and orientation-change sample entropy, and Levy fits of
//! path lengths.
//!
//! A trajectory is first reduced to its *moving points*: a sample is kept only
//! when it lies at least `stationary_m` from the previously kept one. The
//! moving points are then cut into linear paths wherever the heading
//! deviation at an interior point exceeds `split_deg`; consecutive paths
//! share their boundary point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_degrees, Point2D};
use crate::model::{BreakSession, Trajectory, MOVEMENT_FEATURES};
use crate::stats::descriptive;

/// Which angle sequence feeds the orientation-change entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadingSource {
    /// Heading of each moving step, always available.
    #[default]
    Movement,
    /// Tracker-reported body orientation, where present.
    Body,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MovementConfig {
    /// Heading deviation (degrees) above which a new linear path starts.
    pub split_deg: f64,
    /// Steps shorter than this (meters) are treated as standing still.
    pub stationary_m: f64,
    /// Sample-entropy embedding dimension.
    pub entropy_m: usize,
    /// Sample-entropy tolerance as a fraction of the series standard deviation.
    pub entropy_r: f64,
    /// Divide path length by `n - 1` instead of `n` when computing speed.
    pub fencepost_correct: bool,
    pub heading_source: HeadingSource,
    /// Paths needed before a trajectory gets a Levy fit.
    pub levy_min_samples: usize,
}

impl Default for MovementConfig {
    fn default() -> Self {
        Self {
            split_deg: 20.0,
            stationary_m: 0.25,
            entropy_m: 2,
            entropy_r: 0.2,
            fencepost_correct: false,
            heading_source: HeadingSource::Movement,
            levy_min_samples: 5,
        }
    }
}

/// A maximal straight-walking segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPath {
    points: Vec<Point2D>,
    length: f64,
}

impl LinearPath {
    fn from_points(points: Vec<Point2D>) -> Self {
        let length = path_length(&points);
        Self { points, length }
    }

    pub fn points(&self) -> &[Point2D] {
        &self.points
    }

    /// Sum of consecutive displacements, meters.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of positions on the path.
    pub fn n(&self) -> usize {
        self.points.len()
    }
}

fn path_length(points: &[Point2D]) -> f64 {
    points.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

/// Heading deviation at `p2` when walking `p1 -> p2 -> p3`, in degrees:
/// 0 for straight continuation, 180 for reversal.
pub fn direction_change_angle(p1: &Point2D, p2: &Point2D, p3: &Point2D) -> Result<f64> {
    let (ux, uy) = (p2.x - p1.x, p2.y - p1.y);
    let (vx, vy) = (p3.x - p2.x, p3.y - p2.y);
    if (ux == 0.0 && uy == 0.0) || (vx == 0.0 && vy == 0.0) {
        return Err(Error::UndefinedAngle);
    }
    let cross = ux * vy - uy * vx;
    let dot = ux * vx + uy * vy;
    Ok(cross.abs().atan2(dot).to_degrees())
}

/// Drop samples closer than `stationary_m` to the last kept position.
/// Zero-length steps are always dropped.
pub fn moving_points(traj: &Trajectory, stationary_m: f64) -> Vec<Point2D> {
    let mut out: Vec<Point2D> = Vec::with_capacity(traj.len());
    for p in traj.positions() {
        match out.last() {
            None => out.push(p),
            Some(last) => {
                let d = last.distance(&p);
                if d > 0.0 && d >= stationary_m {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Heading deviation at every interior moving point.
pub fn turning_angles(points: &[Point2D]) -> Vec<f64> {
    points
        .windows(3)
        .map(|w| direction_change_angle(&w[0], &w[1], &w[2]).expect("moving points are distinct"))
        .collect()
}

/// Cut a sequence of distinct points into linear paths.
pub fn segment_points(points: &[Point2D], split_deg: f64) -> Vec<LinearPath> {
    if points.len() < 2 {
        return Vec::new();
    }
    let mut paths = Vec::new();
    let mut start = 0;
    for (k, angle) in turning_angles(points).into_iter().enumerate() {
        let pivot = k + 1;
        if angle > split_deg {
            paths.push(LinearPath::from_points(points[start..=pivot].to_vec()));
            start = pivot;
        }
    }
    paths.push(LinearPath::from_points(points[start..].to_vec()));
    paths
}

/// Linear paths of one trajectory after stationary filtering.
pub fn segment_linear_paths(traj: &Trajectory, config: &MovementConfig) -> Vec<LinearPath> {
    segment_points(&moving_points(traj, config.stationary_m), config.split_deg)
}

/// Walking speed of a path: length over sample count, or over `n - 1` with
/// the fencepost correction.
pub fn path_speed(path: &LinearPath, fencepost_correct: bool) -> f64 {
    let denom = if fencepost_correct {
        path.n() - 1
    } else {
        path.n()
    };
    path.length / denom as f64
}

/// Per-step speed: distance between consecutive samples over their time gap.
pub fn velocity_series(traj: &Trajectory) -> Vec<f64> {
    traj.samples()
        .windows(2)
        .map(|w| w[0].position.distance(&w[1].position) / f64::from(w[1].t - w[0].t))
        .collect()
}

/// Sample entropy with tolerance `r_factor` times the population standard
/// deviation of the series. `None` when the series is shorter than `m + 2` or
/// when no template pair matches.
pub fn sample_entropy(series: &[f64], m: usize, r_factor: f64) -> Option<f64> {
    let (_, sd) = descriptive(series)?;
    sample_entropy_with_tolerance(series, m, r_factor * sd)
}

/// Sample entropy with an absolute Chebyshev tolerance `r`.
///
/// Both template lengths are compared over the same `N - m` starting points,
/// self-matches excluded; the result is `-ln(A / B)`.
pub fn sample_entropy_with_tolerance(series: &[f64], m: usize, r: f64) -> Option<f64> {
    let n = series.len();
    if m == 0 || n < m + 2 {
        return None;
    }
    let templates = n - m;
    let mut b: u64 = 0;
    let mut a: u64 = 0;
    for i in 0..templates {
        for j in (i + 1)..templates {
            let matched = (0..m).all(|k| (series[i + k] - series[j + k]).abs() <= r);
            if matched {
                b += 1;
                if (series[i + m] - series[j + m]).abs() <= r {
                    a += 1;
                }
            }
        }
    }
    if a == 0 || b == 0 {
        return None;
    }
    Some(-((a as f64) / (b as f64)).ln())
}

/// Successive heading changes wrapped to (-180, 180].
pub fn orientation_change_series(traj: &Trajectory, config: &MovementConfig) -> Vec<f64> {
    let headings: Vec<f64> = match config.heading_source {
        HeadingSource::Movement => {
            let pts = moving_points(traj, config.stationary_m);
            if pts.len() < 3 {
                return Vec::new();
            }
            pts.windows(2).map(|w| w[0].bearing_to(&w[1])).collect()
        }
        HeadingSource::Body => traj.samples().iter().filter_map(|s| s.orientation).collect(),
    };
    headings.windows(2).map(|w| wrap_degrees(w[1] - w[0])).collect()
}

/// Maximum-likelihood Levy parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyFit {
    /// Location, meters.
    pub mu: f64,
    /// Scale, meters.
    pub c: f64,
    pub log_likelihood: f64,
}

/// Log-likelihood of the Levy density
/// `sqrt(c / 2 pi) exp(-c / (2 (x - mu))) / (x - mu)^(3/2)`.
pub fn levy_log_likelihood(samples: &[f64], mu: f64, c: f64) -> f64 {
    if c <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let mut ll = 0.0;
    for &x in samples {
        let d = x - mu;
        if d <= 0.0 {
            return f64::NEG_INFINITY;
        }
        ll += 0.5 * (c / (2.0 * std::f64::consts::PI)).ln() - c / (2.0 * d) - 1.5 * d.ln();
    }
    ll
}

/// Closed-form scale MLE for a fixed location, and the resulting
/// log-likelihood.
fn profile(samples: &[f64], mu: f64) -> (f64, f64) {
    let n = samples.len() as f64;
    let mut inv_sum = 0.0;
    let mut log_sum = 0.0;
    for &x in samples {
        let d = x - mu;
        inv_sum += 1.0 / d;
        log_sum += d.ln();
    }
    let c = n / inv_sum;
    let ll = 0.5 * n * (c / (2.0 * std::f64::consts::PI)).ln() - 0.5 * n - 1.5 * log_sum;
    (c, ll)
}

const LEVY_MIN_SAMPLES: usize = 5;
const LEVY_EDGE: f64 = 1e-6;
const LEVY_GRID: usize = 200;

/// Fit location and scale by profile likelihood: `c(mu) = n / sum 1/(x - mu)`
/// and `mu` maximised over `[0, min(x) - 1e-6]` by a coarse scan followed by
/// golden-section refinement. `None` for fewer than five samples, non-positive
/// or non-finite values, or all-equal samples.
pub fn fit_levy(samples: &[f64]) -> Option<LevyFit> {
    if samples.len() < LEVY_MIN_SAMPLES || samples.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
        return None;
    }
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == min {
        return None;
    }
    let lo = 0.0;
    let hi = if min > 2.0 * LEVY_EDGE {
        min - LEVY_EDGE
    } else {
        min / 2.0
    };
    let objective = |mu: f64| profile(samples, mu).1;

    let step = (hi - lo) / LEVY_GRID as f64;
    let grid_point = |i: usize| if i == LEVY_GRID { hi } else { lo + step * i as f64 };
    let (best_idx, _) = (0..=LEVY_GRID)
        .map(|i| (i, objective(grid_point(i))))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let mut a = grid_point(best_idx.saturating_sub(1));
    let mut b = grid_point((best_idx + 1).min(LEVY_GRID));

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = objective(x1);
    let mut f2 = objective(x2);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (1.0 + hi.abs()) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = objective(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = objective(x1);
        }
    }
    let candidates = [x1, x2, a, b, grid_point(best_idx)];
    let mu = candidates
        .into_iter()
        .map(|mu| (mu, objective(mu)))
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, cand| if cand.1 > acc.1 { cand } else { acc })
        .0;
    let (c, log_likelihood) = profile(samples, mu);
    Some(LevyFit {
        mu,
        c,
        log_likelihood,
    })
}

/// Per-trajectory movement quantities before pooling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMovement {
    pub path_lengths: Vec<f64>,
    pub path_speeds: Vec<f64>,
    pub direction_changes: Vec<f64>,
    pub velocity_entropy: Option<f64>,
    pub orientation_entropy: Option<f64>,
    pub levy: Option<LevyFit>,
}

pub fn trajectory_movement(traj: &Trajectory, config: &MovementConfig) -> TrajectoryMovement {
    let points = moving_points(traj, config.stationary_m);
    let paths = segment_points(&points, config.split_deg);
    let path_lengths: Vec<f64> = paths.iter().map(LinearPath::length).collect();
    let levy = if path_lengths.len() >= config.levy_min_samples.max(LEVY_MIN_SAMPLES) {
        fit_levy(&path_lengths)
    } else {
        None
    };
    TrajectoryMovement {
        path_speeds: paths
            .iter()
            .map(|p| path_speed(p, config.fencepost_correct))
            .collect(),
        direction_changes: turning_angles(&points),
        velocity_entropy: sample_entropy(&velocity_series(traj), config.entropy_m, config.entropy_r),
        orientation_entropy: sample_entropy(
            &orientation_change_series(traj, config),
            config.entropy_m,
            config.entropy_r,
        ),
        levy,
        path_lengths,
    }
}

/// Raw values pooled across every trajectory of a session.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MovementPools {
    pub path_lengths: Vec<f64>,
    pub path_speeds: Vec<f64>,
    pub direction_changes: Vec<f64>,
    pub velocity_entropy: Vec<f64>,
    pub orientation_entropy: Vec<f64>,
    pub levy_mu: Vec<f64>,
    pub levy_c: Vec<f64>,
}

impl MovementPools {
    fn push(&mut self, t: TrajectoryMovement) {
        self.path_lengths.extend(t.path_lengths);
        self.path_speeds.extend(t.path_speeds);
        self.direction_changes.extend(t.direction_changes);
        self.velocity_entropy.extend(t.velocity_entropy);
        self.orientation_entropy.extend(t.orientation_entropy);
        if let Some(fit) = t.levy {
            self.levy_mu.push(fit.mu);
            self.levy_c.push(fit.c);
        }
    }

    /// Pools in canonical feature order.
    pub fn in_order(&self) -> [&[f64]; 7] {
        [
            &self.path_lengths,
            &self.path_speeds,
            &self.direction_changes,
            &self.velocity_entropy,
            &self.orientation_entropy,
            &self.levy_mu,
            &self.levy_c,
        ]
    }
}

/// The 14 movement features of a session plus the pools behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovementFeatures {
    pub values: [Option<f64>; 14],
    pub pools: MovementPools,
}

impl MovementFeatures {
    pub fn named(&self) -> impl Iterator<Item = (&'static str, Option<f64>)> + '_ {
        MOVEMENT_FEATURES.iter().copied().zip(self.values.iter().copied())
    }
}

/// Mean and population standard deviation of each pooled quantity; empty
/// pools are masked.
pub fn movement_features(session: &BreakSession, config: &MovementConfig) -> MovementFeatures {
    let mut pools = MovementPools::default();
    for traj in &session.trajectories {
        pools.push(trajectory_movement(traj, config));
    }
    let mut values = [None; 14];
    for (k, pool) in pools.in_order().iter().enumerate() {
        if let Some((mean, sd)) = descriptive(pool) {
            values[2 * k] = Some(mean);
            values[2 * k + 1] = Some(sd);
        }
    }
    MovementFeatures { values, pools }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TrackSample;

    fn traj(points: &[(f64, f64)]) -> Trajectory {
        Trajectory::new(
            "t",
            points
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| TrackSample::new(i as u32, Point2D::new(x, y), None))
                .collect(),
        )
        .unwrap()
    }

    fn p(x: f64, y: f64) -> Point2D {
        Point2D::new(x, y)
    }

    #[test]
    fn angle_examples() {
        assert_eq!(direction_change_angle(&p(0., 0.), &p(1., 0.), &p(2., 0.)).unwrap(), 0.0);
        let right = direction_change_angle(&p(0., 0.), &p(1., 0.), &p(1., 1.)).unwrap();
        assert!((right - 90.0).abs() < 1e-12);
        assert_eq!(direction_change_angle(&p(0., 0.), &p(1., 0.), &p(0.5, 0.)).unwrap(), 180.0);
        assert!(matches!(
            direction_change_angle(&p(0., 0.), &p(0., 0.), &p(1., 0.)),
            Err(Error::UndefinedAngle)
        ));
    }

    #[test]
    fn straight_walk_is_one_path() {
        let t = traj(&[(0., 0.), (1., 0.), (2., 0.), (3., 0.), (4., 0.)]);
        let paths = segment_linear_paths(&t, &MovementConfig::default());
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].length(), 4.0);
        assert_eq!(paths[0].n(), 5);
    }

    #[test]
    fn l_shape_is_two_paths() {
        let t = traj(&[(0., 0.), (1., 0.), (2., 0.), (2., 1.), (2., 2.)]);
        let paths = segment_linear_paths(&t, &MovementConfig::default());
        assert_eq!(paths.len(), 2);
        assert_eq!(paths[0].points().last(), paths[1].points().first());
        assert_eq!(paths[0].length() + paths[1].length(), 4.0);
    }

    #[test]
    fn stationary_samples_are_skipped() {
        let t = traj(&[(0., 0.), (0.1, 0.), (1., 0.), (1.05, 0.), (2., 0.)]);
        let pts = moving_points(&t, 0.25);
        assert_eq!(pts, vec![p(0., 0.), p(1., 0.), p(2., 0.)]);
        assert!(segment_linear_paths(&traj(&[(0., 0.), (0.1, 0.)]), &MovementConfig::default()).is_empty());
    }

    #[test]
    fn speed_formula() {
        let lp = LinearPath::from_points(vec![p(0., 0.), p(1., 0.), p(2., 0.), p(4., 0.)]);
        assert_eq!(path_speed(&lp, false), 1.0);
        assert_eq!(path_speed(&lp, true), 4.0 / 3.0);
    }

    #[test]
    fn velocity_examples() {
        assert_eq!(velocity_series(&traj(&[(0., 0.), (1., 0.), (2., 0.)])), vec![1.0, 1.0]);
        assert!(velocity_series(&traj(&[(3., 3.); 4])).iter().all(|&v| v == 0.0));
        let gappy = Trajectory::new(
            "g",
            vec![
                TrackSample::new(0, p(0., 0.), None),
                TrackSample::new(2, p(2., 0.), None),
            ],
        )
        .unwrap();
        assert_eq!(velocity_series(&gappy), vec![1.0]);
    }

    #[test]
    fn entropy_edge_cases() {
        assert_eq!(sample_entropy(&[1.0; 6], 2, 0.2), Some(0.0));
        let ramp: Vec<f64> = (0..20).map(f64::from).collect();
        assert_eq!(sample_entropy_with_tolerance(&ramp, 2, 0.5), None);
        assert_eq!(sample_entropy(&[1.0, 2.0, 3.0], 2, 0.2), None);
    }

    #[test]
    fn alternating_series_entropy() {
        // templates (1,2),(2,1),(1,2),(2,1): B=2 pairs; m+1 (1,2,1),(2,1,2),(1,2,1)
        // over the same four starts: A=2 -> 0
        let s = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        assert_eq!(sample_entropy_with_tolerance(&s, 2, 0.5), Some(0.0));
    }

    #[test]
    fn orientation_changes() {
        let straight = traj(&[(0., 0.), (1., 0.), (2., 0.), (3., 0.)]);
        let cfg = MovementConfig::default();
        assert!(orientation_change_series(&straight, &cfg).iter().all(|&d| d == 0.0));

        let square = traj(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.), (0., 0.), (1., 0.)]);
        let d = orientation_change_series(&square, &cfg);
        assert_eq!(d.len(), 4);
        assert!(d.iter().all(|&x| (x.abs() - 90.0).abs() < 1e-9));

        let body = Trajectory::new(
            "b",
            vec![
                TrackSample::new(0, p(0., 0.), Some(170.0)),
                TrackSample::new(1, p(0., 0.), Some(190.0)),
                TrackSample::new(2, p(0., 0.), None),
            ],
        )
        .unwrap();
        let cfg = MovementConfig {
            heading_source: HeadingSource::Body,
            ..MovementConfig::default()
        };
        // 190 is -170 in (-180, 180]
        assert_eq!(orientation_change_series(&body, &cfg), vec![20.0]);
    }

    #[test]
    fn levy_masks_small_or_degenerate_samples() {
        assert!(fit_levy(&[1.0, 2.0, 3.0, 4.0]).is_none());
        assert!(fit_levy(&[2.0; 10]).is_none());
        assert!(fit_levy(&[1.0, 2.0, -3.0, 4.0, 5.0]).is_none());
        let fit = fit_levy(&[1.0, 2.0, 3.0, 4.0, 8.0]).unwrap();
        assert!(fit.c > 0.0 && fit.mu < 1.0 && fit.mu >= 0.0);
        let direct = levy_log_likelihood(&[1.0, 2.0, 3.0, 4.0, 8.0], fit.mu, fit.c);
        assert!((direct - fit.log_likelihood).abs() < 1e-9);
    }

    #[test]
    fn straight_session_features() {
        let pts: Vec<(f64, f64)> = (0..30).map(|i| (f64::from(i), 0.0)).collect();
        let session = BreakSession::new("s", "A", 900, vec![traj(&pts)]).unwrap();
        let f = movement_features(&session, &MovementConfig::default());
        let v = f.values;
        assert_eq!(v[1], Some(0.0)); // lpl std
        assert_eq!(v[3], Some(0.0)); // speed std
        assert_eq!(v[4], Some(0.0));
        assert_eq!(v[6], Some(0.0)); // velocity entropy
        assert_eq!(v[8], Some(0.0)); // orientation entropy
        assert!(v[10..].iter().all(Option::is_none));
    }

    #[test]
    fn empty_session_is_fully_masked() {
        let session = BreakSession::new("s", "A", 900, vec![]).unwrap();
        let f = movement_features(&session, &MovementConfig::default());
        assert!(f.values.iter().all(Option::is_none));
    }
}
