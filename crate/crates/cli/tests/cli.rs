use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn sumfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumfree")).args(args).output().expect("binary runs")
}

fn write_set(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn strip_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[test]
fn extract_interval_meets_floor() {
    let dir = TempDir::new().unwrap();
    let body: String = (1..=30).map(|n| format!("{n}\n")).collect();
    let input = write_set(dir.path(), "a.txt", &body);
    let v = json(&sumfree(&["extract", "--input", &input]));
    let cert = &v["stages"]["extraction"]["certificate"];
    assert!(cert["count"].as_u64().unwrap() >= 11);
    assert_eq!(v["stages"]["classification"]["route"], "arcs");
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);
}

#[test]
fn analyze_geometric() {
    let dir = TempDir::new().unwrap();
    let input = write_set(dir.path(), "g.json", "[1, 3, 9, 27]");
    let v = json(&sumfree(&["analyze", "--input", &input, "--format", "json"]));
    let c = &v["stages"]["classification"];
    assert_eq!(c["geometric"], true);
    assert_eq!(c["lacunary_exponent"].as_f64().unwrap(), 1.0);
}

#[test]
fn verify_random_set() {
    let dir = TempDir::new().unwrap();
    let input = write_set(dir.path(), "r.txt", "3\n7\n8\n15\n22\n26\n31\n38\n");
    let v = json(&sumfree(&["verify", "--input", &input, "--q", "5", "--cutoff", "2000"]));
    let ids = v["stages"]["identities"].as_array().unwrap();
    assert_eq!(ids.len(), 5);
    for r in ids {
        assert_eq!(r["equal"], true, "{}", r["identity_id"]);
        assert_eq!(r["Q"], 5);
        assert_eq!(r["X"], 2000);
    }
}

#[test]
fn same_config_same_bytes() {
    let dir = TempDir::new().unwrap();
    let input = write_set(dir.path(), "a.txt", "2\n5\n9\n14\n20\n");
    let args = ["extract", "--input", &input, "--k", "2", "--l", "4", "--seed", "7"];
    let a = strip_timings(json(&sumfree(&args)));
    let b = strip_timings(json(&sumfree(&args)));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn out_file_and_round_trip() {
    let dir = TempDir::new().unwrap();
    let input = write_set(dir.path(), "a.txt", "4\n6\n11\n13\n17\n");
    let out = dir.path().join("report.json");
    let o = sumfree(&["extract", "--input", &input, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let r = sumfree_core::pipeline::Report::from_json(&text).unwrap();
    assert!(r.reverify().unwrap());
}

#[test]
fn oracle_small_set() {
    let dir = TempDir::new().unwrap();
    let input = write_set(dir.path(), "s.txt", "1\n2\n3\n4\n5\n");
    let v = json(&sumfree(&["oracle", "--input", &input]));
    let o = &v["stages"]["oracle"];
    assert_eq!(o["oracle"], 3);
    assert_eq!(o["witness"], serde_json::json!([3, 4, 5]));
    assert!(o["gap"].as_i64().unwrap() >= 0);
}

#[test]
fn lp_csv() {
    let o = sumfree(&["lp", "--sizes", "8,16,32"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "N,l1,l1_error,exponent_fit");
    assert_eq!(lines.len(), 4);
}

#[test]
fn phi_small() {
    let v = json(&sumfree(&[
        "phi",
        "--size",
        "120",
        "--base",
        "10",
        "--grid",
        "4096",
        "--weights",
        "random",
        "--seed",
        "3",
    ]));
    let cert = &v["stages"]["phi"];
    assert!(cert["sup_bound"].as_f64().unwrap() <= 10.001);
    assert!(cert["checks"].as_array().unwrap().iter().all(|c| c["holds"] == true));
}

#[test]
fn phi_profile_plot() {
    let o = sumfree(&["phi", "--size", "40", "--base", "10", "--grid", "1024", "--plot", "phi_profile"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("x,abs_phi\n"));
    assert_eq!(text.lines().count(), 1025);
}

#[test]
fn report_plots() {
    let dir = TempDir::new().unwrap();
    let input = write_set(dir.path(), "a.txt", "1\n2\n3\n4\n5\n6\n7\n8\n");
    let o = sumfree(&["report", "--input", &input, "--sizes", "30,100,300", "--plot", "l1_growth"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    let o = sumfree(&["report", "--input", &input, "--sizes", "30,100", "--plot", "surplus_vs_N"]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("N,count,"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(sumfree(&["extract"]).status.code(), Some(2));
    assert_eq!(sumfree(&["extract", "--input", "/nonexistent/set"]).status.code(), Some(2));
    let bad = write_set(dir.path(), "bad.txt", "1\nx\n");
    assert_eq!(sumfree(&["extract", "--input", &bad]).status.code(), Some(2));
    let ok = write_set(dir.path(), "ok.txt", "1\n2\n");
    assert_eq!(sumfree(&["extract", "--input", &ok, "--k", "3", "--l", "5"]).status.code(), Some(2));
    assert_eq!(sumfree(&["analyze", "--input", &ok, "--plot", "l1_growth"]).status.code(), Some(2));
    assert_eq!(sumfree(&["analyze", "--input", &ok, "--threshold-exp", "1/0"]).status.code(), Some(2));
}

#[test]
fn workers_env() {
    let dir = TempDir::new().unwrap();
    let input = write_set(dir.path(), "a.txt", "1\n2\n3\n");
    let o = Command::new(env!("CARGO_BIN_EXE_sumfree"))
        .args(["extract", "--input", &input])
        .env("SUMFREE_WORKERS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
    let o = Command::new(env!("CARGO_BIN_EXE_sumfree"))
        .args(["extract", "--input", &input])
        .env("SUMFREE_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
