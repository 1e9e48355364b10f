//! End-to-end checks of the command-line surface: file formats, exit codes
//! and the generate/estimate/frostman round trips.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thetadim"))
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("thetadim-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn generate_pattern_writes_expected_leaf_count() {
    let dir = tmp_dir("gen");
    let out = dir.join("diag.leaves");
    let status = bin()
        .args([
            "generate", "--kind", "pattern", "--pattern", "0,3", "--d", "2", "--depth", "10",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next().unwrap(), "d=2 depth=10");
    // 2 digits per level over 10 levels
    assert_eq!(lines.count(), 1 << 10);
}

#[test]
fn estimate_cube_reports_two() {
    let dir = tmp_dir("est");
    let set = dir.join("cube.leaves");
    assert!(bin()
        .args(["generate", "--kind", "cube", "--d", "2", "--depth", "10", "--out"])
        .arg(&set)
        .status()
        .unwrap()
        .success());
    let csv = dir.join("est.csv");
    let output = bin()
        .args(["estimate", "--theta", "0.5", "--set"])
        .arg(&set)
        .arg("--out")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    let value: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("value "))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((value - 2.0).abs() < 0.05, "estimate {value}");
    let table = std::fs::read_to_string(&csv).unwrap();
    let header = table
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap();
    assert_eq!(
        header,
        "set_id,theta,delta,s_cross,cost_at_cross,cover_size,clamped"
    );
}

#[test]
fn frostman_round_trip_and_energy() {
    let dir = tmp_dir("frost");
    let set = dir.join("interval.leaves");
    assert!(bin()
        .args(["generate", "--kind", "interval", "--depth", "12", "--out"])
        .arg(&set)
        .status()
        .unwrap()
        .success());
    let out = dir.join("measure");
    assert!(bin()
        .args([
            "frostman", "--t", "0.9", "--alpha", "0.8", "--theta", "0.5", "--delta", "0.0625",
            "--set",
        ])
        .arg(&set)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    assert!(out.join("trace.json").exists());
    let output = bin()
        .args(["energy", "--delta", "0.015625", "--theta", "0.5", "--t", "0.5", "--capacity"])
        .arg("--measure")
        .arg(out.join("measure.csv"))
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("energy "));
    assert!(stdout.contains("capacity_bound "));
}

#[test]
fn study_cp_calibration_reports_formula() {
    let dir = tmp_dir("study");
    // shallow depth keeps this a smoke test; the formula column is exact
    let output = bin()
        .args([
            "study",
            "cp-calibration",
            "--p",
            "0.5",
            "--theta",
            "1",
            "--depth",
            "10",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("formula 1.3333"), "stdout: {stdout}");
    let report = std::fs::read_to_string(dir.join("report.json")).unwrap();
    assert!(report.contains("\"formula\": 1.333333333"));
    assert!(dir.join("calibration.csv").exists());
}

#[test]
fn exit_codes_follow_the_contract() {
    // unknown flag: usage error
    let status = bin().arg("definitely-not-a-command").status().unwrap();
    assert_eq!(status.code(), Some(2));
    // missing input: config error
    let status = bin()
        .args(["estimate", "--set", "/definitely/missing.leaves", "--theta", "0.5"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // scales below resolution: resolution error
    let dir = tmp_dir("codes");
    let set = dir.join("short.leaves");
    assert!(bin()
        .args(["generate", "--kind", "interval", "--depth", "4", "--out"])
        .arg(&set)
        .status()
        .unwrap()
        .success());
    let status = bin()
        .args(["estimate", "--theta", "0.5", "--schedule", "0.0001", "--set"])
        .arg(&set)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn seed_determinism_on_slice_scan() {
    let dir = tmp_dir("seed");
    let set = dir.join("prod.leaves");
    assert!(bin()
        .args([
            "generate", "--kind", "seq-times-interval", "--p", "1", "--depth", "10", "--out",
        ])
        .arg(&set)
        .status()
        .unwrap()
        .success());
    let run = |out: &PathBuf| {
        assert!(bin()
            .args(["slice-scan", "--theta", "1", "--offsets", "8", "--seed", "7", "--set"])
            .arg(&set)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap()
            .success());
        std::fs::read(out).unwrap()
    };
    let a = run(&dir.join("a.csv"));
    let b = run(&dir.join("b.csv"));
    assert_eq!(a, b, "identical CSV bytes on rerun");
}
