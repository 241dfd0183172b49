use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn mcop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcop")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn temp_poset(json: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(json.as_bytes()).unwrap();
    f
}

#[test]
fn validate_builder_passes() {
    let out = mcop(&["validate", "--family", "gtA", "--n", "2", "--lambda", "0,2,4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["pass"], true);
    assert_eq!(r["tool"], "mcop");
}

#[test]
fn hilbert_table_is_27_for_every_chart() {
    let out = mcop(&["hilbert", "--family", "gtA", "--n", "2", "--lambda", "0,2,4", "--kmax", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let row = &r["result"]["rows"][1];
    assert_eq!(row["gamma"], 27);
    let charts = row["charts"].as_object().unwrap();
    assert_eq!(charts.len(), 8);
    assert!(charts.values().all(|v| v == 27));
}

#[test]
fn cox_counts_type_c_n3() {
    let out = mcop(&["cox", "--family", "gtC", "--n", "3", "--emit", "counts"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["counts"]["variables"], 18);
}

#[test]
fn polytope_counts_agree_across_charts() {
    for chart in ["", "q31,q21", "q_{1,1},q_{1,2}"] {
        let out = mcop(&["polytope", "--family", "gtC", "--n", "2", "--lambda", "2,4", "--chart", chart, "--emit", "count"]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(report(&out)["result"]["count"], 81, "chart {chart:?}");
    }
}

#[test]
fn hrep_is_json_rows() {
    let out = mcop(&["polytope", "--family", "gtA", "--n", "1", "--lambda", "0,3", "--emit", "hrep"]);
    let r = report(&out);
    assert!(!r["result"]["ineqs"].as_array().unwrap().is_empty());
}

#[test]
fn mutate_round_trips_rationals() {
    let out = mcop(&["mutate", "--family", "gtA", "--n", "2", "--from", "", "--to", "q21", "--vec", "1/2,-3,2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["image"], serde_json::json!(["1/2", "-7/2", "2"]));
    assert_eq!(r["result"]["inverse_recovers"], true);
}

#[test]
fn transfer_bijection_check() {
    let out = mcop(&["transfer", "--family", "gtC", "--n", "2", "--lambda", "2,4", "--dilate", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["charts"].as_array().unwrap().len(), 16);
}

#[test]
fn fan_poset_is_rejected_with_repro() {
    let f = temp_poset(
        r#"{"elements":["bot","a","b","c","x","top"],
            "covers":[["bot","a"],["bot","b"],["bot","c"],["a","x"],["b","x"],["c","x"],["x","top"]],
            "marked":{"bot":0,"top":3}}"#,
    );
    let out = mcop(&["classify", "--poset", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["error"]["code"], "SPADE_VIOLATION");
    assert!(r["repro"].as_str().unwrap().starts_with("mcop classify --poset"));
}

#[test]
fn redundant_cover_fails_validation() {
    let f = temp_poset(r#"{"elements":["a","b","c"],"covers":[["a","b"],["b","c"],["a","c"]],"marked":{"a":0,"c":1}}"#);
    let out = mcop(&["validate", "--poset", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["result"]["checks"][0]["code"], "BAD_HASSE");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(mcop(&["validate", "--family", "gtA"]).status.code(), Some(2));
    assert_eq!(mcop(&["nonsense"]).status.code(), Some(2));
    assert_eq!(mcop(&["polytope", "--family", "gtA", "--n", "2", "--chart", "zzz"]).status.code(), Some(2));
    assert_eq!(mcop(&["mutate", "--family", "gtA", "--n", "2", "--vec", "1,2"]).status.code(), Some(2));
    assert_eq!(mcop(&["validate", "--poset", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(mcop(&["acceptance", "--only", "15"]).status.code(), Some(2));
}

#[test]
fn dual_family_required() {
    let f = temp_poset(
        r#"{"elements":["bot","a","b","top"],"covers":[["bot","a"],["a","b"],["b","top"]],"marked":{"bot":0,"top":2}}"#,
    );
    let out = mcop(&["dualcheck", "--poset", f.path().to_str().unwrap(), "--samples", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn valcheck_and_nobody_pass() {
    let out = mcop(&["valcheck", "--family", "gtC", "--n", "2", "--lambda", "2,4", "--samples", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let out = mcop(&["nobody", "--family", "gtA", "--n", "2", "--lambda", "0,2,4", "--chart", "q21,q31"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn acceptance_subset_is_deterministic() {
    let a = mcop(&["acceptance", "--only", "8,12"]);
    let b = mcop(&["acceptance", "--only", "8,12"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let r = report(&a);
    assert_eq!(r["criteria"].as_array().unwrap().len(), 2);
}
