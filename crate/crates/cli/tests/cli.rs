use std::process::{Command, Output};

use serde_json::{json, Value};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tightbell")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_temp(v: &Value) -> tempfile::NamedTempFile {
    let f = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(f.path(), v.to_string()).unwrap();
    f
}

fn pr_box() -> Value {
    let corr = json!([["1/2", 0], [0, "1/2"]]);
    let anti = json!([[0, "1/2"], ["1/2", 0]]);
    json!({ "d": 2, "P": { "a1b1": corr, "a1b2": corr, "a2b1": corr, "a2b2": anti } })
}

#[test]
fn dims_reports_rank_and_dimension() {
    let out = run(&["dims", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["constraint_rank"], json!(12));
    assert_eq!(v["verified"], json!(true));
    assert_eq!(v["affine_dim"], json!(24));
}

#[test]
fn verify_cglmp_histogram() {
    let out = run(&["verify-cglmp", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["max"], json!("2"));
    assert_eq!(v["histogram"], json!({ "-1": 48, "-4": 3, "2": 30 }));
}

#[test]
fn tightness_with_witness() {
    let out = run(&["tightness", "5", "--witness"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["rank"], json!(80));
    let steps = v["witness_steps"].as_array().unwrap();
    assert_eq!(steps.len(), 4);
    for (j, s) in steps.iter().enumerate() {
        assert_eq!(s["vectors"].as_array().unwrap().len(), 20);
        assert_eq!(s["rank_after"], json!(20 * (j + 1)));
    }
}

#[test]
fn enumerate_is_deterministic_and_matches_golden() {
    let a = run(&["enumerate", "3", "--space", "corr"]);
    let b = run(&["enumerate", "3", "--space", "corr", "--threads", "1"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let golden: Value =
        serde_json::from_str(include_str!("../../core/tests/golden/corr_facets_d3.json")).unwrap();
    let v = stdout_json(&a);
    assert_eq!(v["facets"], golden["facets"]);
    assert_eq!(v["facets"].as_array().unwrap().len(), 66);
}

#[test]
fn classify_round_trip() {
    let out = run(&["enumerate", "2", "--space", "corr"]);
    let f = write_temp(&stdout_json(&out));
    let again = run(&["classify", f.path().to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(stdout_json(&again)["classes"], stdout_json(&out)["classes"]);
}

#[test]
fn membership_pr_box_is_nonlocal() {
    let f = write_temp(&pr_box());
    let out = run(&["membership", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], json!("nonlocal"));
    assert_eq!(v["class"], json!("chsh"));
    assert_eq!(v["value"], json!("4"));
    assert_eq!(v["certificate"]["bound"], json!("2"));
}

#[test]
fn membership_uniform_is_local() {
    let u = json!([["1/4", "1/4"], ["1/4", "1/4"]]);
    let f = write_temp(&json!({ "d": 2, "P": { "a1b1": u, "a1b2": u, "a2b1": u, "a2b2": u } }));
    let v = stdout_json(&run(&["membership", f.path().to_str().unwrap()]));
    assert_eq!(v["verdict"], json!("local"));
}

#[test]
fn project_pr_box() {
    let f = write_temp(&pr_box());
    let out = run(&["project", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["C"]["a2b2"], json!(["0", "1"]));
}

#[test]
fn input_errors_exit_2() {
    assert_eq!(run(&["dims", "1"]).status.code(), Some(2));
    assert_eq!(run(&["verify-cglmp", "0"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let f = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(f.path(), "{ not json").unwrap();
    let out = run(&["membership", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["exit"], json!(2));
    assert_eq!(run(&["membership", "/nonexistent/file.json"]).status.code(), Some(2));
}
