//! Runner behavior: determinism, output files, exit codes, config errors.

use graphwave_cli::config::{Experiment, ExperimentConfig, Family};
use graphwave_cli::run;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_graphwave"))
}

fn fast_config(family: Family, experiment: Experiment, lambda: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(family, experiment, lambda);
    cfg.truncation_length = 20.0;
    cfg.points_per_edge = 501;
    cfg
}

#[test]
fn identical_configs_produce_identical_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = fast_config(Family::Kink, Experiment::Spectrum, -4.0);
    cfg.output_dir = dir.path().join("a");
    let first = run(&cfg).unwrap();
    cfg.output_dir = dir.path().join("b");
    let second = run(&cfg).unwrap();
    let mut a = first.without_wall_time();
    let mut b = second.without_wall_time();
    a.config.output_dir = Default::default();
    b.config.output_dir = Default::default();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
}

#[test]
fn profile_experiment_writes_its_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = fast_config(Family::KinkAntiKink, Experiment::Profile, 0.0);
    cfg.output_dir = dir.path().to_path_buf();
    let manifest = run(&cfg).unwrap();
    assert!(manifest.passed());
    let profile: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("profile.json")).unwrap())
            .unwrap();
    assert_eq!(profile["family"], "KinkAntiKink");
    let csv = std::fs::read_to_string(dir.path().join("state.csv")).unwrap();
    assert!(csv.starts_with("edge,x,value"));
    let manifest_json =
        std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(manifest_json.contains("shift_map_residual"));
}

#[test]
fn binary_profile_runs_from_flags() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "profile",
            "--family",
            "kink",
            "--lambda",
            "-4",
            "--truncation",
            "20",
            "--points",
            "2001",
            "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("profile.json").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn binary_reports_usage_error_for_unknown_suite() {
    let out = bin().args(["suite", "mystery"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn binary_reports_config_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        r#"
family = "kink"
experiment = "spectrum"
lambda = -4.0
speeds = [1.0, 1.0, 1.0]
L = 20.0
N = -5
"#,
    )
    .unwrap();
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("points_per_edge"),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn binary_exits_one_when_a_check_fails() {
    // The kink/anti-kink linearization at lambda = 1 is positive definite,
    // so the instability experiment cannot find a growing mode.
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "evolve",
            "--family",
            "kink-anti-kink",
            "--lambda",
            "1",
            "--truncation",
            "20",
            "--points",
            "2001",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("unstable_mode_exists"));
}

#[test]
fn env_var_overrides_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .env("GRAPHWAVE_OUT", dir.path())
        .args([
            "profile",
            "--family",
            "kink",
            "--lambda",
            "-5",
            "--truncation",
            "20",
            "--points",
            "2001",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("profile.json").exists());
}

#[test]
fn sweep_writes_branch_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = fast_config(Family::KinkAntiKink, Experiment::BranchSweep, -1.0);
    cfg.lambda = None;
    cfg.lambda_grid = Some(vec![-1.2, -1.0, -0.8]);
    cfg.output_dir = dir.path().to_path_buf();
    let manifest = run(&cfg).unwrap();
    assert!(manifest.passed());
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("lambda,branch_id,mu,residual"));
    assert!(csv.lines().count() > 3);
}

#[test]
fn config_file_round_trips_through_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = fast_config(Family::Kink, Experiment::QuadraticForms, -4.5);
    cfg.output_dir = dir.path().to_path_buf();
    let path = dir.path().join("cfg.toml");
    std::fs::write(&path, cfg.to_toml()).unwrap();
    let loaded = ExperimentConfig::from_path(&path).unwrap();
    assert_eq!(cfg, loaded);
    let manifest = run(&loaded).unwrap();
    assert!(manifest.passed());
    assert!(dir.path().join("forms.json").exists());
}

#[test]
fn instability_run_writes_trajectory_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = fast_config(Family::Kink, Experiment::Instability, -4.0);
    cfg.output_dir = dir.path().to_path_buf();
    cfg.snapshot_times = vec![1.0];
    cfg.tolerances.insert("t_max".into(), 12.0);
    let manifest = run(&cfg).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,deviation_norm,energy_total,energy_vertex"));
    assert!(dir.path().join("snapshot_t1.000.csv").exists());
    assert!(manifest
        .checks
        .iter()
        .any(|c| c.name == "sigma_ratio" && c.passed));
}
