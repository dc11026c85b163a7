use std::io::Write;
use std::process::Command;

use irrmeter_core::exactmath::{int, rat};
use irrmeter_core::simultaneous::binomial_pipeline;
use serde_json::Value;

fn bin(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_irrmeter")).args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

const EXAMPLE: [&str; 9] = ["mu", "--preset", "binomial", "--omega", "1/3", "--beta", "9", "--delta-mode", "bennett"];

fn is_interval(v: &Value) -> bool {
    v["lo"].is_string() && v["hi"].is_string() && v["prec_bits"].is_u64()
}

#[test]
fn mu_report_schema() {
    let (code, out, _) = bin(&EXAMPLE);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    for key in ["command", "inputs", "hypotheses", "result", "certified", "warnings"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["command"], "mu");
    assert_eq!(v["certified"], true);
    for key in ["delta", "Q", "E", "mu"] {
        assert!(is_interval(&v["result"][key]), "{key} is not an interval object");
    }
    assert!(v["hypotheses"].as_array().unwrap().iter().all(|h| h["verdict"] == "pass"));
    assert!(v["result"]["mu"]["lo"].as_str().unwrap().starts_with("2.7428036524"));
}

#[test]
fn deterministic_output() {
    assert_eq!(bin(&EXAMPLE), bin(&EXAMPLE));
    let sweep = ["asymptotics", "--nmax", "60", "--seed", "11"];
    assert_eq!(bin(&sweep), bin(&sweep));
    assert_eq!(bin(&["table", "--format", "json"]), bin(&["table", "--format", "json"]));
}

#[test]
fn no_conclusion_exits_two() {
    let (code, out, err) = bin(&["mu", "--preset", "shifted-log", "--x", "1/2", "--beta", "2"]);
    assert_eq!(code, 2);
    assert!(err.contains("E ≤ 1: no conclusion"), "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["result"]["conclusion"], "no_conclusion");
    assert_eq!(v["certified"], false);
}

#[test]
fn shifted_log_at_nine_is_a_bound() {
    let (code, out, _) = bin(&["mu", "--preset", "shifted-log", "--x", "1/2", "--beta", "9"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["result"]["mu"]["lo"].as_str().unwrap().starts_with("50.65"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(bin(&["mu", "--preset", "nonsense", "--beta", "9"]).0, 1);
    assert_eq!(bin(&["frobnicate"]).0, 1);
    assert_eq!(bin(&["mu", "--preset", "binomial", "--omega", "2", "--beta", "9"]).0, 1);
    assert_eq!(bin(&["mu", "--preset", "binomial", "--omega", "1/3", "--beta", "9", "--delta-mode", "window:5:1"]).0, 1);
    assert_eq!(bin(&["verify", "--nmax", "100000"]).0, 1);
}

#[test]
fn exp_route_is_exactly_two() {
    let (code, out, _) = bin(&["mu", "--preset", "shifted-exp", "--gamma", "1/2", "--beta", "3"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["result"]["conclusion"], "exact_two");
    assert_eq!(v["result"]["mu"]["lo"], v["result"]["mu"]["hi"]);
}

#[test]
fn window_mode_is_not_certified() {
    let (code, out, _) = bin(&["mu", "--preset", "binomial", "--omega", "1/3", "--beta", "9", "--delta-mode", "window:5:25"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["certified"], false);
}

#[test]
fn table_csv_columns() {
    let (code, out, _) = bin(&["table"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "theta,beta,mu_lo,mu_hi,mu_trunc,printed,match");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 18);
    assert!(rows[16].starts_with("cbrt(83),-(253)^3/19,2.69"));
}

#[test]
fn verify_single_preset() {
    let (code, out, _) = bin(&["verify", "--preset", "shifted-log", "--x", "1/3", "--beta", "7/2", "--nmax", "12"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["result"]["all_pass"], true);
    let suites: Vec<&str> = v["result"]["suites"].as_array().unwrap().iter().map(|s| s["suite"].as_str().unwrap()).collect();
    assert_eq!(suites, ["weight", "recurrence", "determinant", "oracle", "integrality"]);
}

#[test]
fn criterion_file_round_trip() {
    let pl = binomial_pipeline(&rat(1, 3), &int(9), 12, 512).unwrap();
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(pl.input.to_text().as_bytes()).unwrap();
    let path = f.path().to_str().unwrap().to_string();
    let (code, out, err) = bin(&["criterion", "--input", &path]);
    assert_eq!(code, 0, "{err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["hypotheses"][1]["verdict"], "pass");
    assert_eq!(v["certified"], false);
    assert_eq!(v["result"]["mu_window"]["certified"], false);

    // a row scaled by 10^3 breaks the size bound at exactly one index
    let mut bad = pl.input.clone();
    let k = bad.blocks.len() / 2;
    for x in bad.blocks[k].matrix[0].iter_mut() {
        *x *= 1000;
    }
    let mut g = tempfile::NamedTempFile::new().unwrap();
    g.write_all(bad.to_text().as_bytes()).unwrap();
    let (code, _, err) = bin(&["criterion", "--input", g.path().to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(err.lines().count(), 1, "{err}");

    // a singular matrix is a structural error
    let mut h = tempfile::NamedTempFile::new().unwrap();
    h.write_all(b"s 1\ntheta 1 1\ntheta 0.5 0.5\nn 1\n1 2\n2 4\nQ 10\nE 2\n").unwrap();
    assert_eq!(bin(&["criterion", "--input", h.path().to_str().unwrap()]).0, 1);
}

#[test]
fn criterion_builtin_pipeline() {
    let (code, out, _) = bin(&["criterion", "--nmax", "16"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["certified"], true);
    assert!(v["result"]["mu_geometric"]["mu"]["lo"].as_str().unwrap().starts_with("2.7428036524"));
}

#[test]
fn text_format_renders() {
    let (code, out, _) = bin(&["mu", "--preset", "binomial", "--omega", "1/3", "--beta", "9", "--format", "text"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("route"));
}
