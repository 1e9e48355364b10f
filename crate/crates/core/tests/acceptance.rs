//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test -p thetadim --test acceptance -- --nocapture` to see
//! the per-criterion lines. Criterion 2 is known-red at this resolution.
//! The asymptotic picture says generic line slices of the circle family are
//! finite point sets; at depth 14 the offsets near the center cross all
//! ~250 kept circles, whose crossings inherit the radial accumulation.
//! Those 250-point slices carry a 2/3-power count profile down to their
//! minimum spacing (~2^-12.5), so every honest estimator at depth-14
//! windows reads at least log2(N)/13.5 ~ 0.5 there, not < 0.1. About 10%
//! of the 64 offsets sit in that band, capping the achievable fraction
//! near 0.89 (hull-based slices cap lower, near 0.70, because the fattened
//! annuli additionally shed tangential cell runs). The test asserts the
//! stated 0.95 anyway and reports the measured fraction.

mod common;

use std::sync::Arc;

use rand::Rng;

use thetadim::covering::{
    brute_force_cover_cost, default_schedule, dim_estimate, fixed_log2_schedule,
    optimal_cover_cost, slice_schedule, theta_sweep, AggregationMode, CoveringQuery,
    EstimatorOptions,
};
use thetadim::dyadic::shared;
use thetadim::experiments::{
    rotated_sequence_formula, run_cp_calibration, run_frostman_audit, run_lower_bound_study,
    CpCalibrationConfig, FrostmanAuditConfig, LowerBoundConfig,
};
use thetadim::generators;
use thetadim::kernels::{capacity_lower_bound, energy, KernelSpec};
use thetadim::measures::DiscreteMeasure;
use thetadim::slicing::{offset_grid, sample_plane, slice_scan};

fn report(n: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {n} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
}

#[test]
fn criterion_1_rotated_sequence_formula() {
    let cfg = CpCalibrationConfig {
        p: 0.5,
        depth: 14,
        thetas: vec![0.25, 0.5, 1.0],
        slice_theta: None,
        ..Default::default()
    };
    let rep = run_cp_calibration(&cfg).expect("calibration runs");
    let mut detail = String::new();
    for row in &rep.rows {
        detail.push_str(&format!(
            "theta={}: {:.4} vs {:.4} (err {:+.4}); ",
            row.theta, row.estimate, row.formula, row.error
        ));
    }
    let targets = [10.0 / 9.0, 1.2, 4.0 / 3.0];
    for (row, want) in rep.rows.iter().zip(targets).collect::<Vec<_>>() {
        assert!(
            (row.formula - want).abs() < 1e-9,
            "formula arithmetic mismatch"
        );
    }
    let pass = rep.max_error <= 0.1;
    report(1, "rotated-sequence formula reproduction", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_2_slice_strict_inequality() {
    let depth = 14;
    let cfg = CpCalibrationConfig {
        p: 0.5,
        depth,
        thetas: vec![0.5],
        slice_theta: Some(0.5),
        n_offsets: 64,
        small_slice_threshold: 0.1,
        seed: 0,
        ..Default::default()
    };
    let rep = run_cp_calibration(&cfg).expect("calibration runs");
    let slice = rep.slice.expect("slice scan present");
    // the bound side: ambient estimate minus one lands near 0.2
    let bound_ok = (slice.bound - 0.2).abs() <= 0.1;
    let fraction_ok = slice.fraction_small >= 0.95;
    let detail = format!(
        "bound={:.4} (target ~0.2), fraction below 0.1 = {:.3} (need >= 0.95)",
        slice.bound, slice.fraction_small
    );
    report(
        2,
        "rotated-sequence slice strict inequality",
        bound_ok && fraction_ok,
        &detail,
    );
    assert!(bound_ok, "{detail}");
    // Known-red at desk scale (see the module docs above): offsets within
    // ~0.06 of the center cross the whole truncated circle family and those
    // slices keep the accumulation's 2/3-law profile at every window the
    // depth-14 grid can express. Measured honest ceiling is ~0.89.
    assert!(fraction_ok, "{detail}");
}

#[test]
fn criterion_3_dp_equals_brute_force() {
    let start = std::time::Instant::now();
    let mut rng = common::rng(42);
    let mut checked = 0usize;
    let mut attempts = 0usize;
    while checked < 200 {
        attempts += 1;
        assert!(attempts < 5000, "query sampling starved");
        let dim = if rng.gen::<bool>() { 1 } else { 2 };
        let depth = rng.gen_range(3..=5);
        let keep = 0.25 + 0.4 * rng.gen::<f64>();
        let set = common::random_tree(&mut rng, dim, depth, keep);
        let s = rng.gen::<f64>() * 3.0;
        let theta = 0.3 + 0.7 * rng.gen::<f64>();
        let delta = (2f64).powf(-(1.0 + rng.gen::<f64>() * (depth as f64 - 1.0)));
        let Ok(q) = CoveringQuery::new(s, theta, delta) else {
            continue;
        };
        let q = if rng.gen::<bool>() {
            q
        } else {
            q.with_upper_slack(1.0 + 2.0 * rng.gen::<f64>()).unwrap()
        };
        let Ok(oracle) = brute_force_cover_cost(&set, &q, 64) else {
            continue; // over the cube budget or below resolution
        };
        let dp = optimal_cover_cost(&set, &q).expect("resolvable query").cost;
        assert!(
            (dp - oracle).abs() <= 1e-12 * oracle.max(1e-300),
            "dp={dp} oracle={oracle} s={s} theta={theta} delta={delta}"
        );
        checked += 1;
    }
    let detail = format!("{checked} instances in {:?}", start.elapsed());
    report(3, "covering DP equals enumeration oracle", true, &detail);
}

#[test]
fn criterion_4_capacity_bound_vs_covering_cost() {
    let start = std::time::Instant::now();
    let mut rng = common::rng(1234);
    let mut checked = 0usize;
    let mut attempts = 0usize;
    while checked < 100 {
        attempts += 1;
        assert!(attempts < 3000, "sampling starved");
        let dim = if rng.gen::<bool>() { 1 } else { 2 };
        let depth = rng.gen_range(4..=6);
        let keep = 0.3 + 0.4 * rng.gen::<f64>();
        let set = shared(common::random_tree(&mut rng, dim, depth, keep));
        let weights = common::random_probability_weights(&mut rng, set.leaf_count());
        let mu = DiscreteMeasure::from_weights(set.clone(), weights).unwrap();
        let theta = 0.3 + 0.7 * rng.gen::<f64>();
        let delta = (2f64).powf(-(1.0 + rng.gen::<f64>() * (theta * depth as f64 - 0.5).max(0.5)));
        let s = 0.1 + rng.gen::<f64>() * (dim as f64 - 0.1);
        let r = delta.powf(1.0 / theta);
        if !(r > 0.0 && r < 1.0) {
            continue;
        }
        // the lemma's exact window: no upper slack on the dyadic cover
        let Ok(q) = CoveringQuery::new(s, theta, delta).and_then(|q| q.with_upper_slack(1.0))
        else {
            continue;
        };
        let Ok(cover) = optimal_cover_cost(&set, &q) else {
            continue;
        };
        let spec = KernelSpec::new(r, theta, s).unwrap();
        let bound = capacity_lower_bound(&mu, &spec).unwrap();
        let slack = 3f64.powf(s) * (dim as f64).powf(s / 2.0);
        assert!(
            bound <= cover.cost * slack * (1.0 + 1e-9),
            "bound={bound} cost={} slack={slack} dim={dim} s={s} theta={theta} delta={delta}",
            cover.cost
        );
        checked += 1;
    }
    let detail = format!("{checked} triples, zero violations, {:?}", start.elapsed());
    report(4, "capacity lower bound vs covering cost", true, &detail);
}

#[test]
fn criterion_5_frostman_construction_audit() {
    use thetadim::measures::{build_joint_frostman, verify_frostman_profile, BallBoundProfile};
    let start = std::time::Instant::now();
    let theta = 2.0 / 3.0;
    let deltas = [0.5f64.powi(6), 0.5f64.powi(7), 0.5f64.powi(8)];
    let sets: Vec<(&str, Arc<thetadim::dyadic::DyadicSet>, f64, f64)> = vec![
        (
            "interval",
            Arc::new(generators::gen_interval(12).unwrap()),
            0.9,
            0.8,
        ),
        (
            "diagonal",
            Arc::new(generators::gen_pattern_fractal(2, &[0, 3], 12).unwrap()),
            0.9,
            0.8,
        ),
        (
            "seq-product",
            Arc::new(
                generators::gen_product(
                    &generators::gen_sequence_set(1.0, 12).unwrap(),
                    &generators::gen_interval(12).unwrap(),
                )
                .unwrap(),
            ),
            1.2,
            0.9,
        ),
    ];
    let mut detail = String::new();
    let mut all_ok = true;
    for (name, set, t, alpha) in &sets {
        let mut fine_cs = Vec::new();
        let mut coarse_cs = Vec::new();
        for &delta in &deltas {
            let (mu, trace) = build_joint_frostman(set, *t, *alpha, theta, delta).unwrap();
            // caps hold exactly on every audited level
            for &(level, ref masses) in &trace.final_level_masses {
                let cap = (2f64).powf(-(level as f64) * t);
                for &v in masses {
                    assert!(
                        v <= cap * (1.0 + 1e-12),
                        "{name}: cap exceeded at level {level}"
                    );
                }
            }
            // monotone chain: every stage only lowers masses
            for stage in &trace.stages {
                assert!(stage.max_scale <= 1.0 + 1e-12, "{name}: stage raised mass");
                for (pre, post) in stage.pre_cap.iter().zip(&stage.post_cap) {
                    assert!(post <= &(pre * (1.0 + 1e-12)), "{name}: non-monotone cap");
                }
            }
            assert!(
                (mu.total_mass() - 1.0).abs() <= 1e-12,
                "{name}: normalization"
            );
            let profile = BallBoundProfile::construction_form(*t, *alpha, theta, delta);
            let prof = verify_frostman_profile(&mu, &profile, 160);
            fine_cs.push(prof.fine_max_ratio);
            coarse_cs.push(prof.coarse_max_ratio);
        }
        let ratio = |v: &[f64]| {
            v.iter().copied().fold(0.0f64, f64::max)
                / v.iter().copied().fold(f64::INFINITY, f64::min)
        };
        let fr = ratio(&fine_cs);
        let cr = ratio(&coarse_cs);
        detail.push_str(&format!("{name}: c-ratios fine={fr:.3} coarse={cr:.3}; "));
        all_ok &= fr <= 2.0 && cr <= 2.0;
    }
    detail.push_str(&format!("{:?}", start.elapsed()));
    report(5, "two-regime construction audit", all_ok, &detail);
    assert!(all_ok, "{detail}");
}

#[test]
fn criterion_6_weighted_energy_stability() {
    let start = std::time::Instant::now();
    let e1 = generators::gen_sequence_set(1.0, 10).unwrap();
    let f = Arc::new(
        generators::gen_product(&e1, &generators::gen_interval(10).unwrap()).unwrap(),
    );
    let cfg = FrostmanAuditConfig::default(); // t=1.2 alpha=0.9 theta=0.5, 3 deltas, 8 planes
    let rep = run_frostman_audit(&f, &cfg).expect("audit preconditions hold");
    let detail = format!(
        "energy C ratio={:.3} (cap 4), tube constants finite={} over {} planes, {:?}",
        rep.energy_constant_ratio,
        rep.tube_constants_finite,
        cfg.n_planes,
        start.elapsed()
    );
    let pass = rep.energy_constant_ratio <= 4.0 && rep.tube_constants_finite;
    report(6, "weighted-energy and sliced-energy stability", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn criterion_7_lower_bound_equality_regime() {
    let start = std::time::Instant::now();
    let mut detail = String::new();
    let mut all_ok = true;
    for theta in [0.5f64, 1.0] {
        let cfg = LowerBoundConfig {
            theta,
            ..Default::default()
        };
        let rep = run_lower_bound_study(&cfg).expect("study runs");
        let frac_ok = rep.attained_fraction >= 0.5;
        let tube_ok = rep.tube_floor_ok;
        detail.push_str(&format!(
            "theta={theta}: attained={:.3} tube_floor_ok={tube_ok}; ",
            rep.attained_fraction
        ));
        all_ok &= frac_ok && tube_ok;
    }
    detail.push_str(&format!("{:?}", start.elapsed()));
    report(7, "slice lower-bound equality regime", all_ok, &detail);
    assert!(all_ok, "{detail}");
}

#[test]
fn criterion_8_calibration_sanity() {
    let start = std::time::Instant::now();
    let thetas = [0.25f64, 0.5, 0.75, 1.0];
    let sched = fixed_log2_schedule(4.0, 7.5, 8);
    let opts = EstimatorOptions {
        eps_sensitivity: false,
        ..Default::default()
    };
    let mut detail = String::new();
    let mut all_ok = true;

    // cube -> d, point -> 0, diagonal pattern -> 1, within 0.05 for all theta
    let targets: Vec<(&str, thetadim::dyadic::DyadicSet, f64, f64)> = vec![
        ("interval", generators::gen_interval(12).unwrap(), 1.0, 0.05),
        ("cube2", generators::gen_cube(2, 11).unwrap(), 2.0, 0.05),
        ("point", generators::gen_point(2, 12).unwrap(), 0.0, 1e-9),
        (
            "diagonal",
            generators::gen_pattern_fractal(2, &[0, 3], 14).unwrap(),
            1.0,
            0.05,
        ),
    ];
    for (name, set, want, tol) in &targets {
        let sweep =
            theta_sweep(set, &thetas, &sched, AggregationMode::Regression, &opts).unwrap();
        let worst = sweep
            .entries
            .iter()
            .map(|e| (e.value - want).abs())
            .fold(0.0f64, f64::max);
        detail.push_str(&format!("{name}: worst err {worst:.4}; "));
        all_ok &= worst <= *tol;
    }

    // theta-sweep monotone (tail-minimum mode) on every generator
    let generators_list: Vec<(&str, thetadim::dyadic::DyadicSet)> = vec![
        ("interval", generators::gen_interval(12).unwrap()),
        ("cube2", generators::gen_cube(2, 10).unwrap()),
        ("point", generators::gen_point(2, 12).unwrap()),
        (
            "diagonal",
            generators::gen_pattern_fractal(2, &[0, 3], 12).unwrap(),
        ),
        ("sequence", generators::gen_sequence_set(1.0, 12).unwrap()),
        (
            "rotated",
            generators::gen_rotated_sequence(
                0.5,
                12,
                generators::resolvable_circle_count(0.5, 12),
            )
            .unwrap(),
        ),
        (
            "seq-product",
            generators::gen_product(
                &generators::gen_sequence_set(1.0, 12).unwrap(),
                &generators::gen_interval(12).unwrap(),
            )
            .unwrap(),
        ),
    ];
    for (name, set) in &generators_list {
        let sweep = theta_sweep(set, &thetas, &sched, AggregationMode::LimInf, &opts)
            .unwrap_or_else(|e| panic!("{name}: sweep failed: {e}"));
        if !sweep.monotone {
            detail.push_str(&format!("{name}: sweep NOT monotone; "));
            all_ok = false;
        }
    }
    detail.push_str(&format!("{:?}", start.elapsed()));
    report(8, "calibration sanity and monotone sweeps", all_ok, &detail);
    assert!(all_ok, "{detail}");
}

#[test]
fn criterion_1_and_2_share_the_set_under_two_minutes() {
    // runtime guard: the full calibration study (formula table + slice scan)
    let start = std::time::Instant::now();
    let cfg = CpCalibrationConfig {
        thetas: vec![1.0],
        ..Default::default()
    };
    let rep = run_cp_calibration(&cfg).unwrap();
    assert!(rep.rows[0].error <= 0.1);
    assert!((rotated_sequence_formula(0.5, 1.0) - 4.0 / 3.0).abs() < 1e-12);
    let elapsed = start.elapsed();
    println!("ACCEPTANCE runtime guard: cp study single theta in {elapsed:?}");
    assert!(elapsed.as_secs() < 120);
}

#[test]
fn acceptance_support_slice_scan_on_product_matches_direct_call() {
    // the slice-scan surface exercised directly (as the CLI would drive it)
    let e1 = generators::gen_sequence_set(1.0, 12).unwrap();
    let f = generators::gen_product(&e1, &generators::gen_interval(12).unwrap()).unwrap();
    let direction = sample_plane(2, 1, 9).unwrap();
    let offsets = offset_grid(&direction, 16).unwrap();
    let ambient = default_schedule(0.5, 12, 6);
    let fine = slice_schedule(0.5, 12, 6);
    let rep = slice_scan(
        &f,
        0.5,
        &direction,
        &offsets,
        &ambient,
        &fine,
        AggregationMode::Regression,
        &EstimatorOptions::default(),
        0.15,
    )
    .unwrap();
    assert_eq!(rep.rows.len(), 16);
    let direct = dim_estimate(
        &f,
        0.5,
        &ambient,
        AggregationMode::Regression,
        &EstimatorOptions::default(),
    )
    .unwrap();
    assert!((rep.ambient.value - direct.value).abs() < 1e-12);
}

#[test]
fn acceptance_support_energy_reference_cross_check() {
    // independent naive double sum against the pruned implementation on the
    // measure the audit uses
    let e1 = generators::gen_sequence_set(1.0, 8).unwrap();
    let f = shared(generators::gen_product(&e1, &generators::gen_interval(8).unwrap()).unwrap());
    let (mu, _) =
        thetadim::measures::build_joint_frostman(&f, 1.2, 0.9, 0.5, 0.125).unwrap();
    let spec = KernelSpec::new(0.125, 0.5, 0.2).unwrap().with_weight(1);
    let fast = energy(&mu, &spec);
    let centers = f.leaf_centers();
    let w = mu.weights();
    let floor = 0.5 * 0.5f64.powi(8);
    let cutoff = spec.cutoff();
    let mut naive = 0.0;
    for i in 0..w.len() {
        if w[i] == 0.0 {
            continue;
        }
        for j in 0..w.len() {
            if w[j] == 0.0 {
                continue;
            }
            let dx = centers[2 * i] - centers[2 * j];
            let dy = centers[2 * i + 1] - centers[2 * j + 1];
            let dist = (dx * dx + dy * dy).sqrt().max(floor);
            if dist >= cutoff {
                continue;
            }
            let phi = if dist < spec.r {
                1.0
            } else {
                (spec.r / dist).powf(spec.s)
            };
            naive += w[i] * w[j] * phi / dist;
        }
    }
    // same pair terms in a different accumulation order
    assert!(
        (fast - naive).abs() <= 1e-9 * naive,
        "fast={fast} naive={naive}"
    );
}
