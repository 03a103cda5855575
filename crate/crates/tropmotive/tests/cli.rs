//! End-to-end checks of the command-line binary: exit codes, determinism,
//! and the shape of the JSON reports.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("tests/fixtures");
    p.push(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tropmotive"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn validate_model_file() {
    let out = run(&["validate", "--model", &fixture("fx_model.json")]);
    let v = stdout_json(&out);
    assert_eq!(v["valid"], true);
    let stamp = &v["inputs"]["model"];
    assert_eq!(stamp["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn check_proper_inline_matrix() {
    let out = run(&["check-proper", "--matrix", "[[1,1]]"]);
    assert_eq!(stdout_json(&out)["proper"], true);
    let out = run(&["check-proper", "--matrix", "[[1,-1]]"]);
    assert_eq!(stdout_json(&out)["proper"], false);
}

#[test]
fn complete_fan_report() {
    let out = run(&["complete", "--fan", r#"{"rank":2,"rays":[[1,0],[0,1]],"cones":[[0,1]]}"#]);
    let v = stdout_json(&out);
    assert_eq!(v["complete"], true);
    let rays = v["fan"]["rays"].as_array().unwrap();
    assert!(rays.len() >= 3);
}

#[test]
fn refine_two_fans() {
    let orthants = r#"{"rank":2,"rays":[[1,0],[0,1],[-1,0],[0,-1]],"cones":[[0,1],[1,2],[2,3],[3,0]]}"#;
    let halves = r#"{"rank":2,"rays":[[1,1],[-1,-1],[1,-1],[-1,1]],"cones":[[0,3],[0,2],[1,3],[1,2]]}"#;
    let out = run(&["refine", "--fan", orthants, "--fan2", halves]);
    let v = stdout_json(&out);
    assert_eq!(v["fan"]["cones"].as_array().unwrap().len(), 8);
}

#[test]
fn volume_matches_closed_form() {
    let out = run(&["volume", "--model", &fixture("fx_model.json"), "--w", "0,0;3,3;1,2"]);
    let v = stdout_json(&out);
    let vols = v["volumes"].as_array().unwrap();
    assert_eq!(vols.len(), 3);
    // (1 - L^{-1}) at the origin
    let origin = vols[0]["value"].as_array().unwrap();
    assert_eq!(origin.len(), 2);
    // zero off the diagonal
    assert_eq!(vols[2]["value"].as_array().unwrap().len(), 0);
}

#[test]
fn volume_jobs_deterministic() {
    let w = "0,0;1,1;2,2;3,3;4,4;5,5;1,2;2,1";
    let a = run(&["volume", "--model", &fixture("fx_model.json"), "--w", w, "--jobs", "1"]);
    let b = run(&["volume", "--model", &fixture("fx_model.json"), "--w", w, "--jobs", "4"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn zeta_and_poles() {
    let out = run(&["zeta", "--model", &fixture("fx_model.json"), "--bound", "8"]);
    let v = stdout_json(&out);
    assert_eq!(v["poles"], serde_json::json!([[1, 1]]));
    assert!(!v["coeffs"].as_array().unwrap().is_empty());

    let out = run(&["poles", "--model", &fixture("fx_model.json")]);
    assert_eq!(stdout_json(&out)["poles"], serde_json::json!([[1, 1]]));
}

#[test]
fn genfun_lists_nerve_faces() {
    let out = run(&["genfun", "--model", &fixture("fx_model.json")]);
    let v = stdout_json(&out);
    // only contributing faces appear: {} and {D0}, not {Dinf}
    let faces: Vec<_> = v["generating_function"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["S"].clone())
        .collect();
    assert_eq!(faces, vec![serde_json::json!([]), serde_json::json!(["D0"])]);
}

#[test]
fn envelope_of_proper_map() {
    let out = run(&["envelope", "--matrix", "[[1,1],[1,2]]"]);
    let v = stdout_json(&out);
    let a = v["a"].as_array().unwrap();
    assert!(!a.is_empty());
    for row in a {
        for x in row.as_array().unwrap() {
            assert!(x.as_i64().unwrap() >= 0);
        }
    }
}

#[test]
fn malformed_input_exits_one() {
    let out = run(&["check-proper", "--matrix", "[[1,"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());

    let out = run(&["validate", "--model", "/nonexistent/path.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_model_exits_two() {
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(fixture("fx_model.json")).unwrap()).unwrap();
    let mut bad = doc.clone();
    bad["divisors"][0]["val"] = serde_json::json!([0, 0]);
    let out = run(&["validate", "--model", &bad.to_string()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("diagnostic"));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for args in [
        vec!["validate", "--model", &*fixture("fx_model.json")],
        vec!["zeta", "--model", &*fixture("fx_model.json"), "--bound", "6"],
        vec!["complete", "--fan", r#"{"rank":2,"rays":[[1,2]],"cones":[[0]]}"#],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout, "args: {args:?}");
    }
}
