use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_towercause");

fn scenario(dir: &Path, name: &str, sigma_s: f64, sigma_a: f64, axes: Option<&str>) -> PathBuf {
    let axes = axes.map(|a| format!(r#", "axes": "{a}""#)).unwrap_or_default();
    let json = format!(
        r#"{{
  "scenario_id": "{name}",
  "support_half_extents": [0.5, 0.5],
  "blocks": [{{"id": "b1", "width": 0.1, "depth": 0.1, "height": 0.1, "mass": 1.0, "color": "red", "center_x": 0.0, "center_y": 0.0}}],
  "pending_blocks": [{{"id": "b2", "width": 0.1, "depth": 0.1, "height": 0.1, "mass": 1.0, "color": "blue"}}],
  "noise": {{"sigma_s": {sigma_s}, "sigma_a": {sigma_a}{axes}}}
}}"#
    );
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, json).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_reports_outcomes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path(), "quiet", 0.0, 0.0, None);
    let t1 = dir.path().join("t1.json");
    let t2 = dir.path().join("t2.json");

    let o = run(&["simulate", "--scenario", s(&sc), "--action", "place b2 0 0", "--seed", "1", "--out", s(&t1)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "outcome: stable");

    let o = run(&["simulate", "--scenario", s(&sc), "--action", "place b2 0.06 0", "--seed", "1", "--out", s(&t1)]);
    assert_eq!(stdout(&o).trim(), "outcome: collapsed (interface 1)");
    run(&["simulate", "--scenario", s(&sc), "--action", "place b2 0.06 0", "--seed", "1", "--out", s(&t2)]);
    assert_eq!(std::fs::read(&t1).unwrap(), std::fs::read(&t2).unwrap());
}

#[test]
fn predict_null_and_low_sample_warning() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path(), "quiet", 0.0, 0.0, None);
    let o = run(&["predict", "--scenario", s(&sc), "--action", "null", "--n", "100", "--seed", "3"]);
    assert_eq!(stdout(&o).trim(), "p=1.000000 stderr=0.000000");

    let noisy = scenario(dir.path(), "noisy", 0.02, 0.02, None);
    let o = run(&["predict", "--scenario", s(&noisy), "--action", "place b2 0 0", "--n", "1", "--seed", "3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("stderr=0.000000"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn predict_matches_the_axis_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path(), "x", 0.02, 0.02, Some("x_only"));
    let o = run(&["predict", "--scenario", s(&sc), "--action", "place b2 0 0", "--n", "100000", "--seed", "11"]);
    let line = stdout(&o);
    let mut parts = line.trim().split(' ');
    let p: f64 = parts.next().unwrap().trim_start_matches("p=").parse().unwrap();
    let se: f64 = parts.next().unwrap().trim_start_matches("stderr=").parse().unwrap();
    assert!((p - 0.9229).abs() <= 3.0 * se + 5e-5, "{line}");
}

#[test]
fn heatmap_files_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario(dir.path(), "quiet", 0.0, 0.0, None);
    let csv = dir.path().join("h.csv");
    let pgm = dir.path().join("h.pgm");
    let o = run(&[
        "heatmap", "--scenario", s(&sc), "--block", "b2", "--grid", "9x1", "--n", "10", "--seed", "5",
        "--out", s(&csv), "--pgm", s(&pgm),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let ps: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(ps, ["0.000000", "1.000000", "1.000000", "1.000000", "1.000000", "1.000000", "1.000000", "1.000000", "0.000000"]);
    assert_eq!(std::fs::read_to_string(&pgm).unwrap(), "P2\n9 1\n255\n0 255 255 255 255 255 255 255 0\n");

    let o = run(&["heatmap", "--scenario", s(&sc), "--block", "b2", "--grid", "0x9", "--seed", "5", "--out", s(&csv)]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["heatmap", "--scenario", s(&sc), "--block", "b7", "--seed", "5", "--out", s(&csv)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn select_centered_fallback_and_certainty() {
    let dir = tempfile::tempdir().unwrap();
    let quiet = scenario(dir.path(), "quiet", 0.0, 0.0, None);
    let o = run(&["select", "--scenario", s(&quiet), "--block", "b2", "--threshold", "0.5", "--grid", "9x1", "--n", "50", "--seed", "2"]);
    let out = stdout(&o);
    assert!(out.contains("place b2 @ (0.0000, 0.0000)"), "{out}");
    assert!(out.contains("expected_p=1.000000"), "{out}");

    let noisy = scenario(dir.path(), "noisy", 0.01, 0.01, None);
    // Monte-Carlo error can tip single cells across the threshold, so a noisy
    // symmetric scenario lands near, not exactly on, the centre.
    let o = run(&["select", "--scenario", s(&noisy), "--block", "b2", "--seed", "2"]);
    let line = stdout(&o);
    let coords: Vec<f64> = line.lines().next().unwrap()
        .trim_start_matches("place b2 @ (").trim_end_matches(')')
        .split(", ").map(|v| v.parse().unwrap()).collect();
    assert!(coords.iter().all(|c| c.abs() <= 0.0025), "{line}");

    let o = run(&["select", "--scenario", s(&noisy), "--block", "b2", "--threshold", "1.01", "--grid", "5x5", "--n", "100", "--seed", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("fallback:"), "{}", stdout(&o));
}

#[test]
fn explain_ranks_the_action_and_reports_abduction_failure() {
    let dir = tempfile::tempdir().unwrap();
    let quiet = scenario(dir.path(), "quiet", 0.0, 0.0, None);
    let trace = dir.path().join("t.json");
    run(&["simulate", "--scenario", s(&quiet), "--action", "place b2 0.06 0", "--seed", "1", "--out", s(&trace)]);

    let r1 = dir.path().join("r1.json");
    let r2 = dir.path().join("r2.json");
    let o = run(&["explain", "--trace", s(&trace), "--scenario", s(&quiet), "--n", "100", "--seed", "4", "--out", s(&r1)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let first = text.lines().nth(1).unwrap();
    assert!(first.starts_with("1. Had b2 been placed at offset (0.0 cm, 0.0 cm)") && first.contains("PN=1.00"), "{text}");
    let o2 = run(&["explain", "--trace", s(&trace), "--scenario", s(&quiet), "--n", "100", "--seed", "4", "--out", s(&r2)]);
    assert_eq!(stdout(&o2), text);
    assert_eq!(std::fs::read(&r1).unwrap(), std::fs::read(&r2).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&r1).unwrap()).unwrap();
    assert_eq!(report["acceptance_rate"], 1.0);
    assert_eq!(report["explanations"][0]["pn"], 1.0);

    // Hand-edit the outcome so no world can reproduce it.
    let mut edited: serde_json::Value = serde_json::from_slice(&std::fs::read(&trace).unwrap()).unwrap();
    edited["outcome"] = serde_json::Value::Bool(true);
    edited.as_object_mut().unwrap().remove("ground_truth");
    std::fs::write(&trace, serde_json::to_string(&edited).unwrap()).unwrap();
    let o = run(&["explain", "--trace", s(&trace), "--scenario", s(&quiet), "--n", "10", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("abduction failed"));
}

#[test]
fn malformed_inputs_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"scenario_id": "x", "extra": 1}"#).unwrap();
    let o = run(&["predict", "--scenario", s(&bad), "--action", "null", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid scenario"));
    // seed is required
    let o = run(&["predict", "--scenario", s(&bad), "--action", "null"]);
    assert_eq!(o.status.code(), Some(2));
}
