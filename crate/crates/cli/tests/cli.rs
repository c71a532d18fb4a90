//! End-to-end runs of the binary: exit codes, files and determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superdecay"))
        .args(args)
        .current_dir(dir)
        .env_remove("SUPERDECAY_OUT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn build_harmonic(dir: &Path) {
    let o = run(dir, &["build", "--kind", "harmonic", "--n0", "12", "--blocks", "3", "--out", "."]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(name).join("report.json")).unwrap()).unwrap()
}

#[test]
fn harmonic_builds_and_verifies() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["build", "--n0", "12", "--blocks", "4", "--out", "."]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = String::from_utf8(o.stdout).unwrap();
    assert!(summary.contains("4 blocks"), "{summary}");
    assert!(summary.contains("32768.000000"), "{summary}");

    build_harmonic(tmp.path());
    let o = run(tmp.path(), &["verify", "construction.json", "--out", "a"]);
    assert_eq!(code(&o), 0, "{}\n{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
    let r = report(tmp.path(), "a");
    assert_eq!(r["format"], "superdecay-report");
    assert_eq!(r["report"]["passed"], true);
    // The resolved configuration is echoed.
    assert_eq!(r["config"]["build"]["n0"], 12);
    assert_eq!(r["config"]["verify"]["seed"], 1);
    assert!(!r["config"]["suites"].as_array().unwrap().is_empty());
}

#[test]
fn bad_input_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    build_harmonic(tmp.path());
    let text = fs::read_to_string(tmp.path().join("construction.json")).unwrap();
    fs::write(tmp.path().join("broken.json"), &text[..text.len() / 3]).unwrap();
    let o = run(tmp.path(), &["verify", "broken.json", "--out", "."]);
    assert_eq!(code(&o), 2);

    let o = run(tmp.path(), &["verify", "missing.json"]);
    assert_eq!(code(&o), 2);

    let o = run(tmp.path(), &["build", "--kind", "plis-miller", "--alpha", "0.6", "--out", "."]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("0 < alpha < 1/2"), "{}", stderr(&o));

    let o = run(tmp.path(), &["verify", "construction.json", "--suite", "holder", "--out", "."]);
    assert_eq!(code(&o), 2, "holder needs a Plis-Miller chain");

    let o = run(tmp.path(), &["verify", "construction.json", "--tolerances", "nonsense=1", "--out", "."]);
    assert_eq!(code(&o), 2);

    fs::write(tmp.path().join("cfg.json"), r#"{"build": {"n0": 12, "colour": 1}}"#).unwrap();
    let o = run(tmp.path(), &["build", "--config", "cfg.json", "--out", "."]);
    assert_eq!(code(&o), 2);
}

#[test]
fn tolerance_below_rounding_fails_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    build_harmonic(tmp.path());
    // Residuals of this construction sit at the f64 rounding floor, about 6e-17.
    let o = run(tmp.path(), &["verify", "construction.json", "--suite", "residual", "--tolerances", "residual=1e-18", "--out", "t"]);
    assert_eq!(code(&o), 1);
    let r = report(tmp.path(), "t");
    assert_eq!(r["report"]["passed"], false);
    assert_eq!(r["config"]["verify"]["tolerances"]["residual"], 1e-18);

    fs::write(tmp.path().join("tol.json"), r#"{"residual": 1e-18}"#).unwrap();
    let o = run(tmp.path(), &["verify", "construction.json", "--suite", "residual", "--tolerances", "tol.json", "--out", "f"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn reports_are_reproducible_across_files_and_workers() {
    let tmp = tempfile::tempdir().unwrap();
    build_harmonic(tmp.path());
    fs::create_dir(tmp.path().join("copy")).unwrap();
    let o = run(tmp.path(), &["build", "--kind", "harmonic", "--n0", "12", "--blocks", "3", "--out", "copy"]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read(tmp.path().join("construction.json")).unwrap(),
        fs::read(tmp.path().join("copy/construction.json")).unwrap()
    );
    for (out, workers) in [("one", "1"), ("four", "4")] {
        let o = run(tmp.path(), &["verify", "construction.json", "--workers", workers, "--seed", "7", "--out", out]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let (a, b) = (report(tmp.path(), "one"), report(tmp.path(), "four"));
    assert_eq!(a["report"], b["report"]);
    assert_eq!(a["report"]["settings"]["seed"], 7);
}

#[test]
fn output_directory_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_superdecay"))
        .args(["build", "--blocks", "1"])
        .current_dir(tmp.path())
        .env("SUPERDECAY_OUT", "envdir")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(tmp.path().join("envdir/construction.json").is_file());
}

#[test]
fn sampling_writes_documented_columns() {
    let tmp = tempfile::tempdir().unwrap();
    build_harmonic(tmp.path());
    let o = run(tmp.path(), &["sample", "construction.json", "--grid", "tline", "--points", "50", "--out", "line"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut rd = csv::Reader::from_path(tmp.path().join("line/samples.csv")).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["t", "sup_sign", "sup_logmag"]);
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 50);
    let logs: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(logs.windows(2).all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0)));

    let o = run(tmp.path(), &["sample", "construction.json", "--grid", "slice", "--t", "0.5", "--out", "slice"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut rd = csv::Reader::from_path(tmp.path().join("slice/samples.csv")).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["x", "y", "t", "u_sign", "u_logmag", "a_xx", "a_xy", "a_yy"]);
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 64 * 64);
    // Full precision: 17 significant digits in scientific notation.
    assert_eq!(rows[1][1].split('e').next().unwrap().replace(['.', '-'], "").len(), 17);

    let o = run(tmp.path(), &["build", "--kind", "parabolic", "--blocks", "4", "--out", "par"]);
    assert_eq!(code(&o), 0);
    let o = run(tmp.path(), &["sample", "par/construction.json", "--points", "20", "--out", "par"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut rd = csv::Reader::from_path(tmp.path().join("par/samples.csv")).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["t", "sup_sign", "sup_logmag", "drift_abs"]);

    let o = run(tmp.path(), &["sample", "construction.json", "--grid", "slice", "--t", "1e9", "--out", "."]);
    assert_eq!(code(&o), 2);
}

#[test]
fn report_command_summarizes_and_propagates_the_verdict() {
    let tmp = tempfile::tempdir().unwrap();
    build_harmonic(tmp.path());
    assert_eq!(code(&run(tmp.path(), &["verify", "construction.json", "--out", "ok"])), 0);
    let o = run(tmp.path(), &["report", "ok/report.json", "--out", "ok"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut rd = csv::Reader::from_path(tmp.path().join("ok/decay.csv")).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["t", "sup_logmag"]);
    assert_eq!(rd.records().count(), 4);

    let tight = ["verify", "construction.json", "--suite", "residual", "--tolerances", "residual=1e-18", "--out", "bad"];
    assert_eq!(code(&run(tmp.path(), &tight)), 1);
    assert_eq!(code(&run(tmp.path(), &["report", "bad/report.json", "--out", "bad"])), 1);

    fs::write(tmp.path().join("junk.json"), "{\"format\": \"other\"}").unwrap();
    assert_eq!(code(&run(tmp.path(), &["report", "junk.json", "--out", "."])), 2);
}
