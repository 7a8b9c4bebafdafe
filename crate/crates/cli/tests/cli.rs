//! End-to-end runs of the `nme` binary: exit codes, outputs and
//! reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nme")).args(args).env_remove("NME_SEED").output().expect("running nme")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report on stdout")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn identity_returns_the_target() {
    let out = nme(&["solve", "--problem", "identity", "--y", "sin:1:0.5", "--eps", "1e-9"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["status"], "certified");
    assert_eq!(r["x"]["b"][0], 0.5);
    assert!(r["x"]["a"].as_array().unwrap().iter().all(|v| v == 0.0));
}

#[test]
fn quadratic_meets_the_residual() {
    let out = nme(&["solve", "--problem", "quadratic", "--mu", "1", "--y", "sin:1:0.1", "--eps", "1e-6"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let residual = r["residual"][0].as_f64().unwrap();
    assert!(residual <= 1e-6, "{residual}");
    assert_eq!(r["provenance"], "estimated");
}

#[test]
fn guard_exit_is_a_mathematical_failure() {
    let out = nme(&["solve", "--problem", "quadratic", "--mu", "1", "--y", "sin:1:10"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["status"], "failed");
    assert_eq!(r["error"], "GuardExit");
    assert!(String::from_utf8_lossy(&out.stderr).contains("GuardExit"));
}

#[test]
fn verify_examples() {
    let out = nme(&["verify", "--problem", "identity", "--y", "cos:2:1+const:0.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["pass"], true);

    let out = nme(&["verify", "--problem", "smoothing", "--y", "sin:3:1", "--eps", "1e-10", "--levels", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    for level in &r["theorem"]["levels"].as_array().unwrap()[..4] {
        assert!((level["ratio"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-9);
    }

    let out = nme(&["verify", "--problem", "smoothing", "--y", "sin:3:1", "--c", "0.1,0.1,0.1,0.1,0.1"]);
    assert_eq!(out.status.code(), Some(2));
    let r = report(&out);
    assert_eq!(r["pass"], false);
    assert_eq!(r["outcome"]["provenance"], "supplied");
    assert!(r["theorem"]["levels"].as_array().unwrap().iter().any(|l| l["bound_ok"] == false));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let trace = path(dir.path(), &format!("trace_{tag}.csv"));
        let rep = path(dir.path(), &format!("report_{tag}.json"));
        let out = nme(&[
            "solve",
            "--problem",
            "nonlinear_smoothing",
            "--y",
            "cos:1:0.05+sin:2:0.02",
            "--eps",
            "1e-5",
            "--seed",
            "7",
            "--out-trace",
            &trace,
            "--out-report",
            &rep,
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
        (fs::read(trace).unwrap(), fs::read(rep).unwrap())
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    let csv = String::from_utf8(a.0).unwrap();
    assert!(csv.starts_with("t,r,accepted,defect_0,resid_0,norm_0,bound_0\n"));
}

#[test]
fn seed_comes_from_the_environment() {
    let run = |seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_nme"));
        cmd.args(["solve", "--problem", "quadratic", "--y", "cos:1:0.05"]).env_remove("NME_SEED");
        if let Some(s) = seed {
            cmd.env("NME_SEED", s);
        }
        report(&cmd.output().unwrap())["constants"].clone()
    };
    assert_eq!(run(Some("3")), run(Some("3")));
    assert_ne!(run(Some("3")), run(None));
}

#[test]
fn config_file_and_coefficient_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = path(dir.path(), "problem.json");
    fs::write(&cfg, r#"{"problem": "smoothing", "K": 4, "N": 2, "q": 4, "c": [2, 2, 2], "d": 1}"#).unwrap();
    let y = path(dir.path(), "y.json");
    fs::write(&y, r#"{"K": 4, "a": [0, 0, 0.3, 0, 0], "b": [0, 0, 0, 0]}"#).unwrap();
    let out = nme(&["solve", "--config", &cfg, "--y", &format!("@{y}"), "--eps", "1e-10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["grading"], "K=4 N=2 q=4");
    assert_eq!(r["provenance"], "supplied");
    // mode 2 is scaled by 1/3, so x = 0.9 cos 2θ
    assert!((r["x"]["a"][2].as_f64().unwrap() - 0.9).abs() < 1e-9);

    // lower-degree files are zero-padded; higher-degree ones are refused
    let out = nme(&["solve", "--problem", "smoothing", "--y", &format!("@{y}")]);
    assert_eq!(out.status.code(), Some(0));
    let out = nme(&["solve", "--problem", "smoothing", "--K", "2", "--y", &format!("@{y}")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        vec!["solve", "--y", "sin:1:1"],
        vec!["solve", "--problem", "cubic", "--y", "sin:1:1"],
        vec!["solve", "--problem", "identity", "--y", "tan:1:1"],
        vec!["solve", "--problem", "identity", "--y", "sin:1:1", "--eps", "-1"],
        vec!["solve", "--problem", "identity", "--y", "@/nonexistent.json"],
        vec!["solve", "--problem", "identity", "--y", "sin:1:1", "--out-report", "/nonexistent/dir/r.json"],
        vec!["frobnicate"],
    ] {
        let out = nme(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
    assert_eq!(nme(&["--help"]).status.code(), Some(0));
    assert_eq!(nme(&["solve", "--help"]).status.code(), Some(0));
}

#[test]
fn props_pass_with_the_default_seed() {
    let out = nme(&["props"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["seed"], 0);
    assert!(r["results"].as_array().unwrap().iter().all(|p| p["passed"] == true));
}
