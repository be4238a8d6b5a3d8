//! End-to-end checks of the binary: exit codes, the JSON envelope, and
//! determinism of the reports.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hyperbell"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn scratch(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("hyperbell-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn tables_passes_and_wraps_the_envelope() {
    let out = run(&["tables"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["schema"], "hyperbell/1");
    assert_eq!(v["command"], "tables");
    assert_eq!(v["pass"], true);
    assert_eq!(v["data"]["kw"]["classes"].as_array().unwrap().len(), 7);
    assert_eq!(v["data"]["modified"]["classes"].as_array().unwrap().len(), 7);
    assert_eq!(v["data"]["kw_matches_golden"], true);
    assert_eq!(v["data"]["modified_matches_golden"], true);
    assert_eq!(v["data"]["relation_between_tables"], "different");
    assert!(v["provenance"]["config_hash"].is_string());
    assert!(v["metadata"]["unix_seconds"].is_number());
}

#[test]
fn tampered_golden_exits_one() {
    // swap one state between the first two published rows
    let golden = serde_json::json!({
        "kw": [[0, 5, 11, 4], [1, 14], [10, 15], [3, 8], [7, 9], [2, 12], [6, 13]],
        "modified": [[1, 2, 13, 14], [5, 6], [9, 10], [7, 8], [3, 15], [0, 12], [4, 11]],
    });
    let path = scratch("tampered.json");
    std::fs::write(&path, golden.to_string()).unwrap();
    let out = run(&["tables", "--golden", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_eq!(v["pass"], false);
    assert_eq!(v["data"]["kw_matches_golden"], false);
    std::fs::remove_file(&path).ok();
}

#[test]
fn malformed_circuit_file_is_a_usage_error() {
    let path = scratch("broken.json");
    std::fs::write(&path, "this is not a circuit").unwrap();
    let out = run(&["tables", "--circuit", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    std::fs::remove_file(&path).ok();
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = run(&["frobnicate"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn subset_pair_is_feasible() {
    let out = run(&["sweep", "--subset", "Phi+*phi+,Phi-*phi-", "--restarts", "4"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["data"]["verdict"], "feasible");
    assert_eq!(v["data"]["subset"], serde_json::json!([0, 5]));
}

#[test]
fn bad_state_label_is_a_usage_error() {
    let out = run(&["sweep", "--subset", "Phi+*phi+,Nope"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid state label"));
}

#[test]
fn reduced_sweep_finds_no_feasible_octet() {
    let out = run(&["sweep", "--symmetry-reduce", "--restarts", "1"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["data"]["octets_covered"], 12870);
    assert_eq!(v["data"]["feasible_ranks"].as_array().unwrap().len(), 0);
    assert_eq!(v["data"]["indeterminate_ranks"].as_array().unwrap().len(), 0);
    assert!(v["data"]["min_infeasible_residual"].as_f64().unwrap() > 1e-8);
}

#[test]
fn twocopy_identifies_everything() {
    let out = run(&["twocopy", "--trials", "10"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["data"]["accuracy"], 1.0);
    assert_eq!(v["data"]["correct"], v["data"]["trials"]);
    assert_eq!(v["data"]["joint_cells"].as_array().unwrap().len(), 16);
}

#[test]
fn dense_coding_roundtrips_without_error() {
    let out = run(&["dense", "--trials", "10"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["data"]["decoding_errors"], 0);
    let capacity = v["data"]["capacity_bits"].as_f64().unwrap();
    assert!((capacity - 2.8074).abs() < 5e-5);
    assert_eq!(v["data"]["codebook"]["entries"].as_array().unwrap().len(), 7);
}

#[test]
fn fingerprint_reports_a_certain_diagonal() {
    let out = run(&["fingerprint", "--trials", "2"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["data"]["diagonal_certain"], true);
    assert_eq!(v["data"]["sampled_wrong_verdicts"], 0);
}

#[test]
fn fingerprint_csv_is_a_seven_by_seven_table() {
    let out = run(&["fingerprint", "--trials", "1", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 8, "header plus seven rows: {text}");
    for (i, line) in lines[1..].iter().enumerate() {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 8);
        let diag: f64 = cells[i + 1].trim().parse().unwrap();
        assert!((diag - 1.0).abs() < 1e-12);
    }
}

#[test]
fn teleport_matches_the_exact_rate() {
    let out = run(&["teleport", "--trials", "2000"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let exact = v["data"]["exact_success_probability"].as_f64().unwrap();
    assert!((exact - 0.5).abs() < 1e-9);
    assert!(v["data"]["min_success_fidelity"].as_f64().unwrap() >= 1.0 - 1e-9);
    assert_eq!(v["data"]["locality"]["kw"]["local"], false);
}

#[test]
fn bounds_prints_the_n_two_chain() {
    let out = run(&["bounds", "--n", "2"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    let rows = v["data"]["per_n"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["n"], 2);
    assert_eq!(rows[1]["upper_bound"], "8");
    assert_eq!(rows[1]["achieved_classes"], 7);
    assert_eq!(rows[0]["upper_bound"], "4");
    assert_eq!(rows[0]["achieved_classes"], 3);
}

#[test]
fn bounds_rejects_n_zero() {
    let out = run(&["bounds", "--n", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn reports_are_deterministic_for_a_fixed_seed() {
    let strip = |out: &Output| {
        let mut v = stdout_json(out);
        v.as_object_mut().unwrap().remove("metadata");
        v.to_string()
    };
    let a = run(&["twocopy", "--trials", "5", "--seed", "123"]);
    let b = run(&["twocopy", "--trials", "5", "--seed", "123"]);
    assert_eq!(code(&a), 0);
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn output_flag_writes_the_report_to_a_file() {
    let path = scratch("tables-report.json");
    let out = run(&["tables", "--output", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["pass"], true);
    std::fs::remove_file(&path).ok();
}

#[test]
fn calibrate_rediscovers_the_second_table() {
    let out = run(&["calibrate", "--target", "modified"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["data"]["targets"]["modified"]["first"]["index"], 339);
    assert_eq!(v["data"]["targets"]["modified"]["reference_rediscovered"], true);
}
