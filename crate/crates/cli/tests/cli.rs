//! End-to-end runs of the `epscalc` binary.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epscalc")).args(args).env_remove("EPSCALC_TOL").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let o = run(args);
    assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

#[test]
fn jet_json_is_canonical() {
    let o = run(&["jet", "x^2", "--at", "3", "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "{\"env\":{\"C\":1,\"kind\":\"analytic\",\"p\":1,\"r\":1},\"slope\":6,\"value\":9,\"x0\":3}\n");
}

#[test]
fn eval_with_negative_point() {
    let v = json(&["eval", "-x^2 + 1", "--at", "-2", "--format", "json"]);
    assert_eq!(v["value"], -3);
    assert_eq!(v["x0"], -2);
}

#[test]
fn integral_brackets_ln2() {
    let v = json(&["integrate", "1/x", "--from", "1", "--to", "2", "--format", "json"]);
    let (lo, hi) = (v["lo"].as_f64().unwrap(), v["hi"].as_f64().unwrap());
    assert!(lo <= std::f64::consts::LN_2 && std::f64::consts::LN_2 <= hi);
    assert!(hi - lo <= 1e-9);
}

#[test]
fn funnel_csv_header_and_rows() {
    let o = run(&["funnel", "sin(x) - x", "--at", "0", "--boxes", "4", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x_lo,x_hi,y_lo,y_hi"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn taylor_check_passes() {
    let v = json(&["taylor", "exp(x)", "--at", "0", "--order", "3", "--check", "--format", "json"]);
    assert_eq!(v["peano"]["pass"], true);
    assert_eq!(v["coeffs"].as_array().unwrap().len(), 4);
}

#[test]
fn lhopital_routes() {
    let v = json(&["lhopital", "sin(x)", "x", "--at", "0", "--format", "json"]);
    assert_eq!(v["form"], "0/0");
    assert_eq!(v["pass"], true);
    let v = json(&["lhopital", "ln(x)", "1/x", "--at", "0", "--claim", "0", "--format", "json"]);
    assert_eq!(v["form"], "*/inf");
    assert_eq!(v["side"], "right");
    // a wrong claim is a verification failure
    let o = run(&["lhopital", "sin(x)", "x", "--at", "0", "--claim", "2", "--side", "left"]);
    assert_eq!(code(&o), 1);
    // without a claim the jet route needs both sides to vanish
    let o = run(&["lhopital", "cos(x)", "x", "--at", "0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_suite_table() {
    let o = run(&["verify", "trig"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("check"));
    assert!(text.trim_end().ends_with(", 0 failed"), "{text}");
    let o = run(&["verify", "trig", "--format", "csv"]);
    assert!(stdout(&o).starts_with("check,grid_point,lhs,rhs,residual,pass\n"));
}

#[test]
fn usage_and_domain_errors_exit_2() {
    for args in [
        &["jet", "x^2"][..],
        &["jet", "x^2", "--at", "1", "--bogus"],
        &["eval", "sin(", "--at", "1"],
        &["eval", "ln(x)", "--at", "-1"],
        &["eval", "1/x", "--at", "0"],
        &["verify", "nope"],
        &["jet", "x", "--at", "1", "--tol", "0.5"],
        &["jet", "x", "--at", "1", "--tol", "0"],
        &["funnel", "x^2", "--at", "0", "--y0", "-1"],
        &["integrate", "x", "--from", "0"],
    ] {
        let o = run(args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn tolerance_from_environment() {
    let bin = env!("CARGO_BIN_EXE_epscalc");
    let bad = Command::new(bin).args(["eval", "x", "--at", "1"]).env("EPSCALC_TOL", "1").output().unwrap();
    assert_eq!(code(&bad), 2);
    let ok = Command::new(bin).args(["eval", "x", "--at", "1"]).env("EPSCALC_TOL", "1e-6").output().unwrap();
    assert_eq!(code(&ok), 0);
    // the flag wins over the environment
    let flag = Command::new(bin).args(["eval", "x", "--at", "1", "--tol", "1e-8"]).env("EPSCALC_TOL", "1").output().unwrap();
    assert_eq!(code(&flag), 0);
}

#[test]
fn out_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("epscalc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("jet.json");
    let args = ["jet", "exp(x)", "--at", "0.5", "--format", "json"];
    let o = run(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&run(&args)));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["funnel", "exp(x)", "--at", "0.3", "--format", "json"][..],
        &["taylor", "cos(x)", "--at", "1", "--order", "4", "--format", "csv"],
        &["verify", "exp", "--format", "json"],
    ] {
        assert_eq!(run(args).stdout, run(args).stdout, "{args:?}");
    }
}
