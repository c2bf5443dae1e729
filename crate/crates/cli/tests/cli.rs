use std::path::Path;
use std::process::{Command, Output};

fn archam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_archam")).args(args).output().unwrap()
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut full = args.to_vec();
    let out = dir.to_str().unwrap();
    full.extend(["--out", out]);
    archam(&full)
}

fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const SMALL: [&str; 6] = ["--grid-n", "200", "--t-max", "0.5", "--snapshots", "0,0.5"];

#[test]
fn flow_normal_headers_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["flow-normal"];
    args.extend(SMALL);
    let out = run_in(dir.path(), &args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(first_line(&dir.path().join("energy.csv")), "t,H");
    assert_eq!(first_line(&dir.path().join("snapshot_t0.500.csv")), "theta,f,p");
    let rows = std::fs::read_to_string(dir.path().join("snapshot_t0.000.csv")).unwrap().lines().count();
    assert_eq!(rows, 201);
    assert!(!dir.path().join("energy.svg").exists());
    let m = manifest(dir.path());
    assert!(m["digests"]["energy.csv"].as_str().unwrap().len() == 64);
}

#[test]
fn repeated_runs_have_identical_digests() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut args = vec!["flow-cauchy", "--format", "csv,json,svg"];
    args.extend(SMALL);
    assert!(run_in(a.path(), &args).status.success());
    assert!(run_in(b.path(), &args).status.success());
    assert_eq!(manifest(a.path())["digests"], manifest(b.path())["digests"]);
    assert!(a.path().join("density.svg").exists());
}

#[test]
fn zero_horizon_gives_single_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["flow-normal", "--grid-n", "100", "--t-max", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let snaps: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with("snapshot_"))
        .collect();
    assert_eq!(snaps.len(), 1);
    let energy = std::fs::read_to_string(dir.path().join("energy.csv")).unwrap();
    assert_eq!(energy.lines().count(), 2);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["flow-normal", "--delta", "1.5"]).status.code(), Some(2));
    assert_eq!(run_in(dir.path(), &["flow-normal", "--grid-min", "3", "--grid-max", "1"]).status.code(), Some(2));
    assert_eq!(run_in(dir.path(), &["flow-normal", "--format", "png"]).status.code(), Some(2));
    assert_eq!(archam(&["no-such-case"]).status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"grid_n": 50, "t_max": 0.2, "snapshots": [0.0, 0.1]}"#).unwrap();
    let out_dir = dir.path().join("out");
    let out = run_in(&out_dir, &["flow-normal", "--config", cfg.to_str().unwrap(), "--grid-n", "80"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = std::fs::read_to_string(out_dir.join("snapshot_t0.100.csv")).unwrap().lines().count();
    assert_eq!(rows, 81);

    std::fs::write(&cfg, r#"{"grid_n": 50, "bogus": 1}"#).unwrap();
    assert_eq!(run_in(&out_dir, &["flow-normal", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn simplex3_writes_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["simplex3", "--t-max", "1", "--snapshots", "0,1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(first_line(&dir.path().join("field_p.csv")), "P1,P2,P3,dP1,dP2,dP3");
    assert_eq!(first_line(&dir.path().join("field_f.csv")), "f1,f2,f3,df1,df2,df3");
    let snap = std::fs::read_to_string(dir.path().join("snapshot_t1.000.csv")).unwrap();
    assert_eq!(snap.lines().count(), 4);
}

#[test]
fn scalar1_and_pendulum_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["scalar1", "--format", "csv,json,svg"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(first_line(&dir.path().join("contour.csv")), "f,P,H");
    assert_eq!(first_line(&dir.path().join("field.csv")), "f,P,df,dP");
    assert_eq!(first_line(&dir.path().join("flows.csv")), "id,t,f,P,H");
    assert!(dir.path().join("flows.svg").exists());

    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["pendulum", "--t-max", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(first_line(&dir.path().join("trajectory.csv")), "t,x,z");
    assert_eq!(first_line(&dir.path().join("phase.csv")), "id,t,x,z");
}

#[test]
fn verify_reports_named_failures_at_zero_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["verify", "--grid-n", "100", "--tolerance", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("FAIL convergence_order.pendulum"), "{stderr}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], false);
}
