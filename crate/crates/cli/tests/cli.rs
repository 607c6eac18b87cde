use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_reebkit"))
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const TORUS: &str = r#"
command = "certify"
class = "(1,0,0)"
t = 1.0
[model]
kind = "torus3"
k = 2
[factor]
preset = "cos-bump"
amplitude = 0.2
[theorem]
id = "persist"
"#;

#[test]
fn torus_persist_scenario_is_valid_with_four_orbits() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "torus.toml", TORUS);
    let out = run(&["run", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "valid");
    assert_eq!(report["result"]["count"], 4);
    assert_eq!(report["result"]["theorem"], "t3");
}

#[test]
fn plug_scenario_certifies_the_fast_orbit() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "plug.toml", "command = \"plug\"\n[plug]\nc1 = 0.25\nc2 = 0.33\n");
    let report_path = dir.path().join("plug.json");
    let out = run(&["run", file.to_str().unwrap(), "--out", report_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(report_path).unwrap()).unwrap();
    let r = &report["result"];
    assert_eq!(r["epsilon"], 0.05);
    assert_eq!(r["delta"], 0.01);
    assert_eq!(r["certificate"]["theorem"], "fast");
    assert_eq!(r["certificate"]["valid"], true);
}

#[test]
fn plug_subcommand_takes_flags() {
    let out = run(&["plug", "--epsilon", "0.05", "--delta", "0.01", "--grid", "128"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["result"]["contact"]["grid"]["tx"], 128);
    let out = run(&["plug", "--epsilon", "0.05"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_class_exits_with_two_and_points_at_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "bad.toml", &TORUS.replace("\"(1,0,0)\"", "\"(1,0,\""));
    let out = run(&["run", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
    assert!(err.contains("malformed homotopy class"), "{err}");
}

#[test]
fn unknown_field_and_missing_field_are_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "typo.toml", &TORUS.replace("t = 1.0", "tt = 1.0"));
    let out = run(&["run", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tt"));
    let file = write(dir.path(), "missing.toml", "command = \"constellation\"\n[model]\nkind = \"sphere\"\nn = 2\n");
    let out = run(&["check", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`t`"));
}

#[test]
fn invalid_certificate_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(dir.path(), "wide.toml", &TORUS.replace("amplitude = 0.2", "amplitude = 0.6"));
    let out = run(&["run", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["status"], "invalid");
}

#[test]
fn filled_flag_relaxes_the_prequantization_bound() {
    let dir = tempfile::tempdir().unwrap();
    let file = write(
        dir.path(),
        "pq.toml",
        "command = \"certify\"\n[theorem]\nid = \"prequantization\"\ndim_q = 2\norder = 3\nprimitive = true\nf_range = [1.0, 2.5]\n",
    );
    assert_eq!(run(&["run", file.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["run", file.to_str().unwrap(), "--filled"]).status.code(), Some(0));
}

#[test]
fn batch_reports_are_sorted_and_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["run", scenarios().to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let mut names: Vec<String> =
        fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert!(names.len() >= 5);
    for n in &names {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n} differs");
    }
    let o = run(&["run", scenarios().to_str().unwrap()]);
    let list: Value = serde_json::from_slice(&o.stdout).unwrap();
    let order: Vec<String> =
        list.as_array().unwrap().iter().map(|r| r["scenario"].as_str().unwrap().to_string()).collect();
    let mut sorted = order.clone();
    sorted.sort();
    assert_eq!(order, sorted);
}

#[test]
fn batch_with_one_broken_file_runs_nothing() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "good.toml", TORUS);
    write(dir.path(), "zbad.toml", "command = \"nope\"\n");
    let out = run(&["run", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("zbad.toml"));
}
