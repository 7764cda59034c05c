mod common;

use std::collections::BTreeMap;

use cogtrack::geometry::Point2D;
use cogtrack::learn::svm::{kernel_matrix, solve_dual, train_svm, SvmParams};
use cogtrack::model::{BreakSession, FloorPlan, TrackSample, Trajectory};
use cogtrack::movement::{
    direction_change_angle, fit_levy, levy_log_likelihood, moving_points, sample_entropy, segment_linear_paths, velocity_series, MovementConfig,
};
use cogtrack::social::{normalized_group_count, session_frames, social_features, SocialConfig};
use cogtrack::stats::{descriptive, wilcoxon_rank_sum, RankSumMethod};
use common::oracles;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn walk(rng: &mut impl Rng, n: usize) -> Trajectory {
    let mut p = Point2D::new(25.0, 17.0);
    let mut heading: f64 = 0.0;
    let samples = (0..n)
        .map(|t| {
            heading += rng.random_range(-40.0..40.0);
            let step = rng.random_range(0.0..1.5);
            p = p.offset(step * heading.to_radians().cos(), step * heading.to_radians().sin());
            TrackSample::new(t as u32, p, Some(rng.random_range(0.0..360.0)))
        })
        .collect();
    Trajectory::new("w", samples).unwrap()
}

#[test]
fn sample_entropy_matches_template_counting() {
    let mut r = rng(1);
    for case in 0..100 {
        let n = r.random_range(4..=300);
        let series: Vec<f64> = match case % 3 {
            0 => (0..n).map(|_| r.random_range(0.0..1.0)).collect(),
            1 => (0..n).map(|_| r.random_range(0..4) as f64).collect(),
            _ => (0..n).map(|i| (i as f64 * 0.3).sin() + r.random_range(-0.2..0.2)).collect(),
        };
        let fast = sample_entropy(&series, 2, 0.2);
        let slow = oracles::sample_entropy(&series, 2, 0.2);
        match (fast, slow) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-9, "case {case}: {a} vs {b}"),
            (None, None) => {}
            other => panic!("case {case}: {other:?}"),
        }
    }
}

#[test]
fn sample_entropy_examples() {
    assert_eq!(sample_entropy(&[1.0; 6], 2, 0.2), Some(0.0));
    let alt = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
    // r = 0.5 absolute: the factor is relative to the std of 0.5
    assert_eq!(sample_entropy(&alt, 2, 1.0), oracles::sample_entropy(&alt, 2, 1.0));
    let ramp: Vec<f64> = (0..20).map(f64::from).collect();
    assert_eq!(cogtrack::movement::sample_entropy_with_tolerance(&ramp, 2, 0.5), None);
}

#[test]
fn exact_rank_sum_matches_enumeration_for_every_small_split() {
    for n in 2..=10usize {
        for na in 1..n {
            let nb = n - na;
            for mask in 0u32..(1 << n) {
                if mask.count_ones() as usize != na {
                    continue;
                }
                let a: Vec<f64> = (0..n).filter(|k| mask & (1 << k) != 0).map(|k| k as f64 * 1.5 + 0.25).collect();
                let b: Vec<f64> = (0..n).filter(|k| mask & (1 << k) == 0).map(|k| k as f64 * 1.5 + 0.25).collect();
                let r = wilcoxon_rank_sum(&a, &b).unwrap();
                assert_eq!(r.method, RankSumMethod::Exact);
                let expect = oracles::rank_sum_p(na, nb, r.statistic);
                assert!((r.p_two_sided - expect).abs() < 1e-12, "{na}+{nb} mask {mask:b}");
            }
        }
    }
}

#[test]
fn exact_and_normal_agree_at_ten_plus_ten() {
    let mut r = rng(2);
    for _ in 0..50 {
        let shift = r.random_range(0.0..1.5);
        let a: Vec<f64> = (0..10).map(|_| r.random_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..10).map(|_| r.random_range(0.0..1.0) + shift).collect();
        let (ranks, tie) = cogtrack::stats::midranks(&[a.clone(), b.clone()].concat());
        assert_eq!(tie, 0.0);
        let w: f64 = ranks[..10].iter().sum();
        let exact = cogtrack::stats::rank_sum_exact_p(10, 10, w);
        let (_, normal) = cogtrack::stats::rank_sum_normal(10, 10, w, 0.0);
        assert!((exact - normal).abs() <= 0.02, "exact {exact} normal {normal}");
    }
}

#[test]
fn levy_recovery_on_twenty_datasets() {
    for seed in 0..20 {
        let xs = oracles::levy_samples(&mut rng(100 + seed), 2000, 0.0, 1.0);
        let fit = fit_levy(&xs).unwrap();
        assert!(fit.mu.abs() <= 0.05, "seed {seed}: mu {}", fit.mu);
        assert!((fit.c - 1.0).abs() <= 0.1, "seed {seed}: c {}", fit.c);
    }
}

#[test]
fn levy_translation() {
    let xs = oracles::levy_samples(&mut rng(7), 2000, 0.0, 1.0);
    let shifted: Vec<f64> = xs.iter().map(|x| x + 3.0).collect();
    let (a, b) = (fit_levy(&xs).unwrap(), fit_levy(&shifted).unwrap());
    assert!((b.mu - a.mu - 3.0).abs() <= 0.05, "{} vs {}", a.mu, b.mu);
    assert!((b.c - a.c).abs() <= 0.1 * a.c);
}

#[test]
fn levy_beats_grid() {
    let mut r = rng(8);
    for _ in 0..5 {
        let mu = r.random_range(0.0..2.0);
        let c = r.random_range(0.2..3.0);
        let xs = oracles::levy_samples(&mut r, 300, mu, c);
        let fit = fit_levy(&xs).unwrap();
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let c_hi = 4.0 * fit.c.max(c);
        for i in 0..100 {
            for j in 1..=100 {
                let m = (min - 1e-6) * i as f64 / 99.0;
                let cc = c_hi * j as f64 / 100.0;
                assert!(fit.log_likelihood >= levy_log_likelihood(&xs, m, cc) - 1e-9);
            }
        }
    }
}

#[test]
fn levy_masks_degenerate_input() {
    assert!(fit_levy(&[1.0, 2.0, 3.0, 4.0]).is_none());
    assert!(fit_levy(&[2.0; 10]).is_none());
}

fn random_problem(r: &mut impl Rng, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    loop {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![r.random_range(0.0..1.0), r.random_range(0.0..1.0)]).collect();
        let y: Vec<f64> = (0..n).map(|_| if r.random_bool(0.5) { 1.0 } else { -1.0 }).collect();
        if y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0) {
            return (rows, y);
        }
    }
}

#[test]
fn smo_reaches_the_dual_optimum() {
    let mut r = rng(9);
    for case in 0..60 {
        let n = 2 + case % 5;
        let (rows, y) = random_problem(&mut r, n);
        let c = [0.5, 1.0, 10.0][case % 3];
        let k = kernel_matrix(&rows, r.random_range(0.5..4.0));
        let sol = solve_dual(&k, &y, c, 1e-10, 100_000);
        let (best, _) = oracles::svm_dual_optimum(&k, &y, c);
        let got = oracles::dual_objective(&k, &y, &sol.alpha);
        assert!((got - best).abs() <= 1e-6, "case {case}: smo {got} optimum {best}");
        if n == 3 {
            let grid = oracles::svm_dual_grid3(&k, &y, c, 400);
            assert!(grid <= best + 1e-9 && grid >= best - 1e-2);
        }
    }
}

#[test]
fn smo_satisfies_kkt() {
    let mut r = rng(10);
    for case in 0..40 {
        let n = 3 + case % 20;
        let (rows, y) = random_problem(&mut r, n);
        let params = SvmParams::default();
        let model = train_svm(&rows, &y, &params).unwrap();
        let k = kernel_matrix(&rows, model.gamma);
        let sol = solve_dual(&k, &y, params.c, params.tol, params.max_passes * n);
        assert!(sol.converged);
        for i in 0..n {
            let f: f64 = (0..n).map(|j| sol.alpha[j] * y[j] * k[i][j]).sum::<f64>() - sol.rho;
            let margin = y[i] * f;
            let tol = 1e-3 + 1e-9;
            if sol.alpha[i] <= 0.0 {
                assert!(margin >= 1.0 - tol, "case {case} i {i}: {margin}");
            } else if sol.alpha[i] >= params.c {
                assert!(margin <= 1.0 + tol, "case {case} i {i}: {margin}");
            } else {
                assert!((margin - 1.0).abs() <= tol, "case {case} i {i}: {margin}");
            }
        }
    }
}

#[test]
fn velocity_series_matches_direct_distances() {
    let traj = walk(&mut rng(11), 50);
    let s = traj.samples();
    let v = velocity_series(&traj);
    for i in 0..s.len() - 1 {
        let d = ((s[i + 1].position.x - s[i].position.x).powi(2) + (s[i + 1].position.y - s[i].position.y).powi(2)).sqrt();
        assert!((v[i] - d).abs() < 1e-12);
    }
}

#[test]
fn segment_count_matches_angle_scan() {
    let mut r = rng(12);
    let cfg = MovementConfig::default();
    for _ in 0..20 {
        let traj = walk(&mut r, 200);
        let pts = moving_points(&traj, cfg.stationary_m);
        let mut expected = if pts.len() >= 2 { 1 } else { 0 };
        for w in pts.windows(3) {
            let v1 = (w[1].x - w[0].x, w[1].y - w[0].y);
            let v2 = (w[2].x - w[1].x, w[2].y - w[1].y);
            let cos = (v1.0 * v2.0 + v1.1 * v2.1) / ((v1.0.hypot(v1.1)) * (v2.0.hypot(v2.1)));
            if cos.clamp(-1.0, 1.0).acos().to_degrees() > cfg.split_deg {
                expected += 1;
            }
        }
        assert_eq!(segment_linear_paths(&traj, &cfg).len(), expected);
    }
}

#[test]
fn direction_change_examples() {
    let p = Point2D::new;
    assert!(direction_change_angle(&p(0.0, 0.0), &p(1.0, 0.0), &p(2.0, 0.0)).unwrap().abs() < 1e-12);
    assert!((direction_change_angle(&p(0.0, 0.0), &p(1.0, 0.0), &p(1.0, 1.0)).unwrap() - 90.0).abs() < 1e-12);
    assert!((direction_change_angle(&p(0.0, 0.0), &p(1.0, 0.0), &p(0.5, 0.0)).unwrap() - 180.0).abs() < 1e-12);
    assert!(direction_change_angle(&p(0.0, 0.0), &p(0.0, 0.0), &p(1.0, 0.0)).is_err());
}

/// Recount overall and per-region `G_t` frame by frame from the smoothed
/// frames and compare with the pooled features.
#[test]
fn social_features_match_frame_recount() {
    let plan = FloorPlan::default_facility();
    let cfg = SocialConfig::default();
    let mut r = rng(13);
    // a few people milling about near a couple of meeting points
    let centers = [Point2D::new(6.0, 6.0), Point2D::new(24.0, 25.0)];
    let trajectories: Vec<Trajectory> = (0..8)
        .map(|i| {
            let c = centers[i % 2];
            let samples = (0..120u32)
                .map(|t| {
                    let p = c.offset(r.random_range(-1.5..1.5), r.random_range(-1.5..1.5));
                    let o = if r.random_bool(0.8) { Some(p.bearing_to(&c).rem_euclid(360.0)) } else { None };
                    TrackSample::new(t, p, o)
                })
                .collect();
            Trajectory::new(format!("p{i}"), samples).unwrap()
        })
        .collect();
    let session = BreakSession::new("s", "A", 120, trajectories).unwrap();
    let frames = session_frames(&session, &plan, &cfg);
    let feats = social_features(&session, &plan, &cfg);

    let mut overall = Vec::new();
    let mut by_region: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for f in &frames {
        let n: usize = f.groups.iter().map(|g| g.member_ids.len()).sum();
        if let Some(g) = normalized_group_count(f.groups.len(), n) {
            overall.push(g);
        }
        for name in plan.region_names() {
            let gs: Vec<_> = f.groups.iter().filter(|g| g.region == name).collect();
            let nr: usize = gs.iter().map(|g| g.member_ids.len()).sum();
            if !gs.is_empty() {
                by_region.entry(name.to_string()).or_default().push(gs.len() as f64 / nr as f64);
            }
        }
    }
    assert!(!overall.is_empty(), "fixture should produce groups");
    let close = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(x), Some(y)) => (x - y).abs() < 1e-12,
        (None, None) => true,
        _ => false,
    };
    let (m, s) = descriptive(&overall).unwrap();
    assert!(close(feats.values[0], Some(m)) && close(feats.values[1], Some(s)));
    for (k, name) in plan.region_names().iter().enumerate() {
        let d = by_region.get(*name).and_then(|v| descriptive(v));
        assert!(close(feats.values[2 + 2 * k], d.map(|x| x.0)), "{name} mean");
        assert!(close(feats.values[3 + 2 * k], d.map(|x| x.1)), "{name} std");
    }
}
