use std::fs;
use std::process::Command;

use serde_json::Value;
use wigf_cli::run;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("wigf").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = call(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn eval_example() {
    let v = json(&["eval", "--model", "exp:lambda=2", "--weight", "x", "--beta", "2"]);
    assert!((v["value"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(v["config"]["seed"], 42);
    assert_eq!(v["config"]["args"]["model"], "exp:lambda=2");
}

#[test]
fn flagged_entry_is_reported() {
    let v = json(&["eval", "--model", "uniform:a=1,b=3", "--weight", "invx", "--beta", "2"]);
    assert_eq!(v["paper_flagged"], true);
    let want = 0.25 * 3f64.ln();
    assert!((v["value"].as_f64().unwrap() - want).abs() < 1e-9);
    assert!((v["printed"].as_f64().unwrap() - 4.0 * 3f64.ln()).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_2() {
    let (code, _, err) = call(&["eval", "--model", "exp:lambda=2", "--weight", "bogus", "--beta", "2"]);
    assert_eq!(code, 2);
    assert!(err.contains("bogus"));
    assert_eq!(call(&["frobnicate"]).0, 2);
    assert_eq!(call(&["eval", "--model", "exp:lambda=2", "--beta", "2", "--nope"]).0, 2);
    assert_eq!(call(&["eval", "--model", "exp:lambda=-1", "--beta", "2"]).0, 2);
    assert_eq!(call(&["eval", "--model", "exp:lambda=1", "--beta", "0.5"]).0, 2);
}

#[test]
fn numeric_failure_exits_3() {
    // x f^2 for the Pareto law with c = 0.4 is not integrable
    let (code, _, err) = call(&["eval", "--model", "pareto1:c=0.4,gamma=1", "--weight", "pow:m=2", "--beta", "1", "--method", "quad"]);
    assert_eq!(code, 3, "{err}");
    let (code, _, _) = call(&["residual", "--model", "uniform:a=0,b=1", "--beta", "2", "--t", "1"]);
    assert_eq!(code, 3);
}

#[test]
fn gof_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("relief.csv");
    let (code, _, _) = call(&["datasets", "--name", "relief", "--out", csv.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, out, _) = call(&["gof", "--input", csv.to_str().unwrap(), "--models", "exp"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"lambda\":0.5263"), "{out}");
    let v = json(&["gof", "--input", csv.to_str().unwrap()]);
    assert_eq!(v["rows"][0]["fit"]["model"], "gumbel2");
}

#[test]
fn datasets_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["bladder", "relief"] {
        let p = dir.path().join(format!("{name}.csv"));
        assert_eq!(call(&["datasets", "--name", name, "--out", p.to_str().unwrap()]).0, 0);
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("value\n"));
        let back = wigf_cli::ingest_csv(&p).unwrap();
        let fixture: wigf_core::gof::Fixture = name.parse().unwrap();
        assert_eq!(back.values(), fixture.values());
    }
}

#[test]
fn ingest_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("v.csv");
    fs::write(&p, "1.1\n2.2\n").unwrap();
    assert_eq!(wigf_cli::ingest_csv(&p).unwrap().values(), &[1.1, 2.2]);
    fs::write(&p, "1.0\n2.0\nabc\n").unwrap();
    let (code, _, err) = call(&["gof", "--input", p.to_str().unwrap()]);
    assert_eq!(code, 4);
    assert!(err.contains("row 3"), "{err}");
    let missing = dir.path().join("missing.csv");
    assert_eq!(call(&["gof", "--input", missing.to_str().unwrap()]).0, 4);
}

#[test]
fn verify_exit_status_follows_result() {
    let (code, out, _) = call(&["verify", "--identity", "escort-igf", "--model", "exp:lambda=1.5", "--weight", "x", "--tol", "1e-7"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["config"]["identity_tol"], 1e-7);
    let v = json(&["verify", "--identity", "mixture-rigf", "--model", "exp:lambda=1", "--model-g", "exp:lambda=2", "--beta", "1.5"]);
    assert_eq!(v["passed"], true);
    let (code, _, _) = call(&["verify", "--identity", "gen-escort", "--model", "exp:lambda=1"]);
    assert_eq!(code, 2);
}

#[test]
fn rigf_and_residual_measures() {
    let v = json(&["rigf", "--model-f", "exp:lambda=1", "--model-g", "exp:lambda=2", "--measure", "kl"]);
    assert!((v["value"].as_f64().unwrap() - (1.0 - 2f64.ln())).abs() < 1e-8);
    let v = json(&["residual", "--model", "exp:lambda=1", "--beta", "2", "--t", "1"]);
    assert!((v["value"].as_f64().unwrap() - 0.75).abs() < 1e-9);
    let v = json(&["residual", "--model", "exp:lambda=1", "--beta", "2", "--t", "1", "--measure", "bound"]);
    assert!(v["satisfied"].as_bool().unwrap());
}

#[test]
fn simulation_csv_and_determinism() {
    let args = ["simulate", "np", "--n", "20,40", "--beta", "1.7", "--t", "0.5", "--bootstrap", "10", "--replications", "2", "--format", "csv"];
    let (code, a, _) = call(&args);
    assert_eq!(code, 0);
    assert!(a.starts_with("beta,t,n,bias,mse\n"));
    assert_eq!(a.lines().count(), 3);
    assert_eq!(a, call(&args).1);
    let (_, b, _) = call(&["simulate", "np", "--n", "20,40", "--beta", "1.7", "--t", "0.5", "--bootstrap", "10", "--replications", "2", "--format", "csv", "--seed", "7"]);
    assert_ne!(a, b);
    let v = json(&["simulate", "mle", "--n", "100", "--beta", "1.2", "--t", "0.1"]);
    assert_eq!(v["config"]["replications"], 250);
    assert!(v["rows"][0]["mse"].as_f64().unwrap() < 0.02);
}

#[test]
fn estimate_commands() {
    let v = json(&["estimate", "np", "--dataset", "relief", "--beta", "1.2", "--t", "1.5"]);
    assert_eq!(v["config"]["bandwidth"], 0.56);
    assert_eq!(v["n"], 20);
    let v = json(&["estimate", "mle", "--dataset", "relief", "--beta", "1", "--t", "0"]);
    assert!((v["estimates"][0]["estimate"].as_f64().unwrap() - 1.9).abs() < 1e-12);
    let v = json(&["estimate", "np", "--gen", "exp:lambda=0.5", "--n", "50", "--beta", "2", "--t", "0.5"]);
    assert!(v["config"]["bandwidth"].as_f64().unwrap() > 0.0);
    assert_eq!(v["config"]["source"]["seed"], 42);
    assert_eq!(call(&["estimate", "np", "--beta", "2"]).0, 2);
}

#[test]
fn binary_entry_point() {
    let out = Command::new(env!("CARGO_BIN_EXE_wigf"))
        .args(["eval", "--model", "exp:lambda=2", "--weight", "x", "--beta", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    let out = Command::new(env!("CARGO_BIN_EXE_wigf")).arg("bogus").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
