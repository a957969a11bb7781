use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn peeling(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peeling"))
        .args(args)
        .env_remove("PEELING_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn simulate(dir: &Path, args: &[&str]) -> Output {
    let mut all = vec!["simulate", "--out", dir.to_str().unwrap()];
    all.extend_from_slice(args);
    peeling(&all)
}

fn summary(dir: &Path, stem: &str) -> Value {
    let text = fs::read_to_string(dir.join(format!("{stem}-summary.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn type2_constants_include_h_star_root() {
    let out = peeling(&["constants", "--model", "type2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let line = text.lines().find(|l| l.starts_with("h* ")).unwrap();
    assert!(line.contains("(16/3)^(1/3)"), "{line}");
    assert!(line.contains("1.74716"), "{line}");
}

#[test]
fn quad_constants_as_json() {
    let out = peeling(&["constants", "--model", "quad", "--format", "json"]);
    assert!(out.status.success());
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    let b = doc["constants"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "b")
        .unwrap();
    assert_eq!(b["value"].as_f64(), Some(4.5));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        peeling(&["constants", "--model", "hexagon"]).status.code(),
        Some(2)
    );
    assert_eq!(
        peeling(&["verify", "--suite", "everything"]).status.code(),
        Some(2)
    );
    assert_eq!(
        peeling(&["simulate", "--algo", "pv"]).status.code(),
        Some(2)
    );
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        simulate(
            dir.path(),
            &["--algo", "layers", "--model", "quad", "--steps", "10"]
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        simulate(dir.path(), &["--algo", "pv", "--steps", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn fpp_runs_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let out = simulate(
            dir.path(),
            &["--algo", "fpp", "--steps", "1000", "--seed", "1"],
        );
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for file in ["fpp-type2-s1-r0000.csv", "fpp-type2-s1-summary.json"] {
        let (x, y) = (
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap(),
        );
        assert_eq!(x, y, "{file}");
    }
    let trace = fs::read_to_string(a.path().join("fpp-type2-s1-r0000.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("k,tau,P,V"));
    assert_eq!(trace.lines().count(), 1002);
}

#[test]
fn layer_summary_reports_edge_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(
        dir.path(),
        &[
            "--algo",
            "layers",
            "--steps",
            "20000",
            "--replicas",
            "4",
            "--stride",
            "100",
            "--exact-cutoff",
            "30",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = summary(dir.path(), "layers-type2-s0");
    assert_eq!(doc["exact_rows_checked"], 29);
    assert_eq!(doc["truncated"], false);
    let rate = &doc["ratios"]["A_n/n"];
    assert_eq!(rate["count"], 4);
    let mean = rate["mean"].as_f64().unwrap();
    assert!((0.2..0.5).contains(&mean), "{mean}");
    assert_eq!(doc["files"].as_array().unwrap().len(), 4);
    let trace = fs::read_to_string(dir.path().join("layers-type2-s0-r0003.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("n,P,V,H,A,U,G"));
}

#[test]
fn quad_pv_trace_uses_half_perimeter() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(
        dir.path(),
        &[
            "--algo", "pv", "--model", "quad", "--steps", "10000", "--stride", "20", "--format",
            "json",
        ],
    );
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("pv-quad-s0-r0000.json")).unwrap();
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["columns"][1], "P");
    assert_eq!(doc["rows"][0]["P"], 1);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 501);
    let last = &doc["rows"][500];
    assert_eq!(last["n"], 10_000);
    assert!(last["P"].as_u64().unwrap() >= 1);
}

#[test]
fn map_layers_write_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(
        dir.path(),
        &["--algo", "map-layers", "--rmax", "3", "--seed", "5"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let edges = fs::read_to_string(dir.path().join("map-layers-type2-s5-r0000.edges")).unwrap();
    assert!(edges.lines().count() > 3);
}

#[test]
fn hole_guard_truncates_with_marker() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(
        dir.path(),
        &[
            "--algo",
            "pv",
            "--steps",
            "100000",
            "--max-hole-volume",
            "0",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    let trace = fs::read_to_string(dir.path().join("pv-type2-s0-r0000.csv")).unwrap();
    assert!(trace
        .lines()
        .last()
        .unwrap()
        .starts_with("# truncated: true"));
    assert_eq!(
        summary(dir.path(), "pv-type2-s0")["truncated_replicas"],
        serde_json::json!([0])
    );
}

#[test]
fn verify_budget_zero_skips_everything() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = peeling(&[
        "verify",
        "--suite",
        "exact",
        "--budget",
        "0",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let doc: Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(doc["skipped"].as_array().unwrap().len(), 6);
    assert_eq!(doc["budget_exceeded"], true);
}
