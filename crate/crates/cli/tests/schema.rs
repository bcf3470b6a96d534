use std::process::Command;

use serde_json::Value;

fn report(args: &[&str]) -> Value {
    let o = Command::new(env!("CARGO_BIN_EXE_sumfree")).args(args).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn reports_match_published_schema() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();

    let dir = tempfile::TempDir::new().unwrap();
    let input = dir.path().join("a.txt");
    std::fs::write(&input, "3\n7\n8\n15\n22\n26\n31\n38\n").unwrap();
    let input = input.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["analyze", "--input", input],
        vec!["extract", "--input", input, "--k", "2", "--l", "4"],
        vec!["verify", "--input", input],
        vec!["oracle", "--input", input],
        vec!["report", "--input", input, "--sizes", "30,100"],
        vec!["phi", "--size", "60", "--base", "10", "--grid", "1024", "--weights", "random"],
        vec!["lp", "--sizes", "8,16,32", "--json"],
    ];
    for args in runs {
        let v = report(&args);
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| format!("{} at {}", e, e.instance_path)).collect();
        assert!(errors.is_empty(), "{:?}: {errors:#?}", args[0]);
    }
}

#[test]
fn schema_rejects_malformed_rationals() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let dir = tempfile::TempDir::new().unwrap();
    let input = dir.path().join("a.txt");
    std::fs::write(&input, "1\n2\n3\n").unwrap();
    let mut v = report(&["extract", "--input", input.to_str().unwrap()]);
    v["stages"]["extraction"]["certificate"]["x_star"] = serde_json::json!([1, 0]);
    assert!(!validator.is_valid(&v));
}
