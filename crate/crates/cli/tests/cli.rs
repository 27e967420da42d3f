use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nogo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nogo"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(str::to_owned).collect();
    let mut rows = vec![header];
    for rec in r.records() {
        rows.push(rec.unwrap().iter().map(str::to_owned).collect());
    }
    rows
}

#[test]
fn nogo_reports_violation_and_certificate() {
    let v = json(&nogo(&[
        "nogo",
        "--t1",
        "0",
        "--t2",
        "2.0943951",
        "--t3",
        "1.0471976",
    ]));
    assert_eq!(v["conclusion"], "NoClassicalModel");
    assert_eq!(v["classical_outcome"]["verdict"], "Infeasible");
    assert!((v["quantum_report"]["lhs"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((v["quantum_report"]["rhs"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert!(v["classical_outcome"]["certificate"].is_object());
}

#[test]
fn degrees_flag_matches_radians() {
    let deg = json(&nogo(&[
        "nogo", "--deg", "--t1", "0", "--t2", "120", "--t3", "60",
    ]));
    let rad = json(&nogo(&[
        "nogo",
        "--t1",
        "0",
        "--t2",
        "2.0943951023931953",
        "--t3",
        "1.0471975511965976",
    ]));
    assert_eq!(deg, rad);
}

#[test]
fn separable_angles_admit_classical_model() {
    let v = json(&nogo(&[
        "nogo", "--deg", "--t1", "0", "--t2", "90", "--t3", "180",
    ]));
    assert_eq!(v["conclusion"], "ClassicalModelExists");
    assert_eq!(
        v["classical_outcome"]["witness"].as_array().unwrap().len(),
        8
    );
}

#[test]
fn singlet_scan_csv_has_constant_width() {
    let text = stdout(&nogo(&["singlet-scan", "--grid", "36"]));
    let rows = csv_rows(&text);
    assert_eq!(
        rows[0],
        ["delta", "trace_correlation", "closed_form", "abs_error"]
    );
    assert_eq!(rows.len(), 37);
    assert!(rows.iter().all(|r| r.len() == 4));
    for r in &rows[1..] {
        assert!(r[3].parse::<f64>().unwrap() <= 1e-12);
    }
}

#[test]
fn angle_scan_json_reparses() {
    let v = json(&nogo(&["angle-scan", "--grid", "6", "--format", "json"]));
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 36);
    assert!(rows.iter().any(|r| r["verdict"] == "Infeasible"));
}

#[test]
fn simulate_single_context_csv() {
    let text = stdout(&nogo(&[
        "simulate", "--mode", "singlet", "--t1", "0", "--t2", "0", "--n", "1000", "--seed", "3",
    ]));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].len(), 9);
    assert_eq!(rows[1][0], "C1");
    assert_eq!(rows[1][7].parse::<f64>().unwrap(), -1.0);
}

#[test]
fn simulate_three_contexts_json() {
    let v = json(&nogo(&[
        "simulate", "--mode", "singlet", "--deg", "--t1", "0", "--t2", "120", "--t3", "60", "--n",
        "200000", "--seed", "11", "--format", "json",
    ]));
    assert_eq!(v["runs"].as_array().unwrap().len(), 3);
    assert_eq!(v["cross_context"]["exceeded"], true);
    assert!(v["cross_context"]["caveat"].as_str().unwrap().len() > 10);
}

#[test]
fn realizability_fast_and_exact_agree() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"n": 3, "pairs": [[0,1,-0.5],[1,2,0.5],[0,2,0.5]]}"#,
    );
    let good = write(
        dir.path(),
        "good.json",
        r#"{"n": 3, "pairs": [[0,1,0.5],[1,2,-0.5],[0,2,-0.5]]}"#,
    );
    for file in [&bad, &good] {
        let fast = json(&nogo(&["realizability", "--file", file]));
        let exact = json(&nogo(&["realizability", "--file", file, "--exact"]));
        assert_eq!(fast["verdict"], exact["verdict"]);
    }
    let v = json(&nogo(&["realizability", "--file", &bad]));
    assert_eq!(v["verdict"], "Infeasible");
    assert!(v["witness"].is_null());
}

#[test]
fn realizability_with_means() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "p.json",
        r#"{"n": 2, "pairs": [[0,1,1.0]], "means": [[0, 1.0], [1, -1.0]]}"#,
    );
    assert_eq!(
        json(&nogo(&["realizability", "--file", &f]))["verdict"],
        "Infeasible"
    );
}

#[test]
fn bell_check_on_a_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "model.json",
        r#"{"weights": [0.5, 0.5], "variables": {"a": [1, -1], "b": [1, 1], "c": [1, -1]}}"#,
    );
    let v = json(&nogo(&["bell-check", "--file", &f]));
    assert_eq!(v["bell_report"]["holds"], true);
    assert_eq!(v["bell_report"]["lhs"].as_f64(), Some(0.0));
    assert_eq!(v["bell_report"]["rhs"].as_f64(), Some(0.0));
    assert_eq!(v["chain_holds"], true);
}

#[test]
fn bell_check_rejects_non_sign_values() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "model.json",
        r#"{"weights": [0.5, 0.5], "variables": {"a": [1, 0.5], "b": [1, 1], "c": [1, -1]}}"#,
    );
    let out = nogo(&["bell-check", "--file", &f]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn vn_demo_values() {
    let v = json(&nogo(&["vn-demo"]));
    let spec: Vec<f64> = v["operator_sum_spectrum"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    let r2 = std::f64::consts::SQRT_2;
    assert_eq!(spec.len(), 2);
    // 12 significant digits
    assert!(
        (spec[0] + r2).abs() < 1e-11 && (spec[1] - r2).abs() < 1e-11,
        "{spec:?}"
    );
    assert_eq!(v["disjoint"], true);
}

#[test]
fn output_flag_writes_only_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("scan.csv");
    let out = nogo(&[
        "singlet-scan",
        "--grid",
        "4",
        "-o",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(written, stdout(&nogo(&["singlet-scan", "--grid", "4"])));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_of_range = write(dir.path(), "p.json", r#"{"n": 3, "pairs": [[0,1,1.5]]}"#);
    let too_many = write(dir.path(), "q.json", r#"{"n": 5, "pairs": []}"#);
    let malformed = write(dir.path(), "r.json", "{not json");
    let missing = dir.path().join("missing.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["nogo", "--t1", "0", "--t2", "1"],
        vec!["nogo", "--t1", "x", "--t2", "1", "--t3", "2"],
        vec!["frobnicate"],
        vec!["singlet-scan", "--grid", "1"],
        vec!["vn-demo", "--format", "csv"],
        vec![
            "simulate", "--mode", "quantum", "--t1", "0", "--t2", "0", "--n", "10", "--seed", "1",
        ],
        vec![
            "simulate", "--mode", "lhv", "--t1", "0", "--t2", "0", "--n", "0", "--seed", "1",
        ],
        vec!["realizability", "--file", missing.to_str().unwrap()],
        vec!["realizability", "--file", &out_of_range],
        vec!["realizability", "--file", &too_many],
        vec!["realizability", "--file", &malformed],
    ];
    for args in cases {
        let out = nogo(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    assert_eq!(nogo(&["--help"]).status.code(), Some(0));
}
