use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_precession"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("error JSON on stderr")
}

#[test]
fn sweep_cat_optimal_samples_average_to_max() {
    let out = run(&["sweep", "--state", "cat", "--k", "7", "--points", "720"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("phi,pos,optimal"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 727);
    let opt: Vec<f64> = rows.iter().filter(|r| r[2] == 1.0).map(|r| r[1]).collect();
    assert_eq!(opt.len(), 7);
    let mean = opt.iter().sum::<f64>() / 7.0;
    assert!((mean - 0.65625).abs() < 1e-9, "{mean}");
}

#[test]
fn classical_monte_carlo_max_is_bound() {
    let v = stdout_json(&["mc-classical", "--k", "7", "--points", "20000", "--seed", "4"]);
    assert_eq!(v["max_score"].as_f64().unwrap(), 4.0 / 7.0);
}

#[test]
fn two_level_subspace_scores_one_half() {
    let v = stdout_json(&["score", "--d", "8", "--subspace", "3..4", "--state", "cat", "--k", "3"]);
    assert!((v["score"].as_f64().unwrap() - 0.5).abs() < 1e-10);
    assert_eq!(v["violation"], Value::Bool(false));
}

#[test]
fn table1_rows() {
    let v = stdout_json(&["table1", "--starts", "16"]);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 9);
    let find = |label: &str| rows.iter().find(|r| r["label"] == label).unwrap();
    let r = find("P8_7");
    assert!((r["classical_bound"].as_f64().unwrap() - 0.571).abs() < 5e-4);
    assert!((r["max_score"].as_f64().unwrap() - 0.656).abs() < 5e-4);
    let r = find("P4_3");
    assert!((r["classical_bound"].as_f64().unwrap() - 0.667).abs() < 5e-4);
    assert!((r["max_score"].as_f64().unwrap() - 0.750).abs() < 5e-4);
    let r = find("P8_5u");
    assert!((r["max_score"].as_f64().unwrap() - 0.683).abs() < 2e-3);
}

#[test]
fn outputs_are_reproducible_and_atomic() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, extra) in [("shots", vec!["--shots", "2000"]), ("optimize", vec!["--uneven", "--k", "3", "--starts", "8"])] {
        let a = dir.path().join(format!("{cmd}-a"));
        let b = dir.path().join(format!("{cmd}-b"));
        for p in [&a, &b] {
            let mut args = vec![cmd, "--seed", "9", "--out", p.to_str().unwrap()];
            args.extend(&extra);
            assert!(run(&args).status.success());
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{cmd}");
    }
    let seq = dir.path().join("seq");
    assert!(run(&["shots", "--shots", "2000", "--seed", "9", "--sequential", "--out", seq.to_str().unwrap()])
        .status
        .success());
    assert_eq!(std::fs::read(&seq).unwrap(), std::fs::read(dir.path().join("shots-a")).unwrap());
    let names: Vec<String> =
        std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(names.len(), 5, "stray files: {names:?}");
}

#[test]
fn written_state_is_accepted_by_other_commands() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("opt.json");
    let p = path.to_str().unwrap();
    let report = {
        assert!(run(&["optimize", "--d", "6", "--k", "3", "--uneven", "--starts", "8", "--out", p]).status.success());
        serde_json::from_str::<Value>(&std::fs::read_to_string(&path).unwrap()).unwrap()
    };
    let angles: Vec<String> =
        report["angles_rad"].as_array().unwrap().iter().map(|a| a.as_f64().unwrap().to_string()).collect();
    let joined = angles.join(",");
    let v = stdout_json(&["score", "--state", p, "--k", "3", "--angles", &joined]);
    let expected = report["score"].as_f64().unwrap();
    assert!((v["score"].as_f64().unwrap() - expected).abs() < 1e-9);

    for cmd in ["sweep", "pulse", "wigner", "shots"] {
        let out = run(&[cmd, "--state", p, "--k", "3", "--points", "16", "--shots", "100"]);
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn pulse_readout_reproduces_score() {
    let v = stdout_json(&["pulse", "--state", "table1:P8_3", "--k", "3"]);
    assert!((v["score"].as_f64().unwrap() - 0.697642).abs() < 1e-5);
    assert_eq!(v["preparation"]["steps"].as_array().unwrap().len(), 7);
    assert_eq!(v["readout"].as_array().unwrap().len(), 3);
}

#[test]
fn usage_errors_exit_2_with_json() {
    for args in [
        vec!["score", "--k", "4"],
        vec!["frobnicate"],
        vec!["score", "--subspace", "3-4"],
        vec!["score", "--state", "table1:P9_9"],
        vec!["score", "--state", "/no/such/file.json"],
    ] {
        let out = run(&args);
        let code = out.status.code().unwrap();
        let err = stderr_json(&out);
        assert!(code == 2 || (code == 1 && err["error"] == "io"), "{args:?}: exit {code}");
        assert!(err["message"].is_string());
    }
}

#[test]
fn numerical_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ground.json");
    let mut amps = vec![[0.0, 0.0]; 8];
    amps[0] = [1.0, 0.0];
    std::fs::write(&path, serde_json::json!({ "J": 3.5, "amplitudes": amps }).to_string()).unwrap();
    let out = run(&["wigner", "--state", path.to_str().unwrap(), "--subspace", "2..5"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "numerical");
}

#[test]
fn version_reports_formats() {
    let out = run(&["--version"]);
    assert!(out.status.success());
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.contains("format version 1"), "{s}");
    assert!(Path::new(env!("CARGO_BIN_EXE_precession")).exists());
}
