use std::path::Path;
use std::process::{Command, Output};

use cqa_core::harness::InstanceDescriptor;

fn cqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqa")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ok(o: Output) -> Output {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    o
}

#[test]
fn generate_writes_valid_screened_instances() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = ok(cqa(&["generate", "--sizes", "8,10", "--per-size", "2", "--degree", "3", "--seed", "4", "--out", out]));
    let files: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(files.len(), 4);
    for f in &files {
        let desc = InstanceDescriptor::from_json(&std::fs::read_to_string(f).unwrap()).unwrap();
        assert!(f.ends_with(&format!("{}.json", desc.id)));
        assert!(cqa_core::harness::is_unique_ground(desc.graph().unwrap()).unwrap());
    }
    // same seed, same files
    let again = ok(cqa(&["generate", "--sizes", "8,10", "--per-size", "2", "--degree", "3", "--seed", "4", "--out", out]));
    assert_eq!(stdout(&again).lines().collect::<Vec<_>>(), files);
}

#[test]
fn generate_other_problems() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = ok(cqa(&["generate", "--problem", "sat", "--sizes", "6", "--per-size", "1", "--out", out]));
    let path = stdout(&o).trim().to_string();
    let desc = InstanceDescriptor::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(desc.problem, cqa_core::harness::Problem::Sat);
    let o = ok(cqa(&["generate", "--problem", "gc", "--sizes", "4", "--degree", "2", "--colors", "3", "--per-size", "1", "--out", out]));
    assert!(stdout(&o).contains("gc-n4-"));
}

#[test]
fn gap_curve_for_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    ok(cqa(&[
        "gap", "--sizes", "8", "--degree", "3", "--s-grid", "6", "--out", out.to_str().unwrap(),
    ]));
    for m in ["penalty", "cqa"] {
        let text = std::fs::read_to_string(dir.path().join(format!("curve.{m}.csv"))).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("s,e0,e1,gap"));
        assert_eq!(lines.count(), 6);
    }
    let o = ok(cqa(&["gap", "--sizes", "8", "--degree", "3", "--s-grid", "0,0.5,1", "--method", "cqa"]));
    let text = stdout(&o);
    assert!(text.starts_with("# instance="));
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn scaling_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scaling.csv");
    let o = ok(cqa(&[
        "scaling", "--sizes", "8,10", "--per-size", "2", "--degree", "3", "--s-grid", "11", "--s-tol", "1e-3",
        "--out", out.to_str().unwrap(),
    ]));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,instance_id,seed,method,gap_min,s_min,e0_final,wall_time_s"));
    assert_eq!(lines.count(), 8);
    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["complete"], true);
    assert!(Path::new(&format!("{}.summary.json", out.display())).exists());
}

#[test]
fn resources_for_a_graph_file() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.json");
    let g = cqa_core::generate_random_regular(12, 6, 7).unwrap();
    std::fs::write(&graph, g.to_json()).unwrap();
    let o = ok(cqa(&["resources", "--input", graph.to_str().unwrap()]));
    let reports: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(reports[0]["method"], "penalty");
    assert_eq!(reports[0]["additional_edges"], 66 - 36);
    assert!(reports[1]["additional_edges"].as_u64().unwrap() <= 12);
}

#[test]
fn config_file_is_read_and_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "sizes = [12]\ndegree = 6\nseed = 7\nmethod = \"penalty\"\n").unwrap();
    let o = ok(cqa(&["resources", "--config", cfg.to_str().unwrap()]));
    let reports: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 1);
    assert_eq!(reports[0]["n"], 12);
    let o = ok(cqa(&["resources", "--config", cfg.to_str().unwrap(), "--method", "cqa"]));
    let reports: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(reports[0]["method"], "cqa");
}

#[test]
fn bad_input_fails_cleanly() {
    let o = cqa(&["generate", "--sizes", "4", "--degree", "3", "--per-size", "1", "--out", "/tmp/never-used-cqa"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("screening kept 0"));
    let o = cqa(&["gap", "--s-grid", "x"]);
    assert!(!o.status.success());
}

#[test]
fn verify_passes() {
    let o = ok(cqa(&["verify"]));
    let text = stdout(&o);
    assert!(text.lines().count() >= 10);
    assert!(!text.contains("FAIL"));
}
