// Named to sort before `acceptance`: cargo stops at the first failing test
// target, and acceptance stays red while any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use taubounds::{
    clip, decide, population_bounds, BenchmarkScenario, CovariateScale, Pattern,
};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_taubounds"));
    c.env_remove("TAUBOUNDS_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn simulate_to(dir: &TempDir, name: &str, args: &[&str]) -> PathBuf {
    let out = dir.path().join(name);
    let mut full = vec!["simulate"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--output", path_str(&out)]);
    let o = run(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

fn pattern_fractions(csv: &Path) -> [f64; 4] {
    let text = fs::read_to_string(csv).unwrap();
    let mut counts = [0usize; 4];
    let mut n = 0;
    for line in text.lines().skip(1) {
        let (x, y) = line.split_once(',').unwrap();
        let z = match (x.is_empty(), y.is_empty()) {
            (false, false) => Pattern::Complete,
            (false, true) => Pattern::OnlyX,
            (true, false) => Pattern::OnlyY,
            (true, true) => Pattern::Missing,
        };
        counts[z.index()] += 1;
        n += 1;
    }
    counts.map(|c| c as f64 / n as f64)
}

fn analyze_json(args: &[&str]) -> Value {
    let mut full = vec!["analyze"];
    full.extend_from_slice(args);
    let o = run(&full);
    assert!(o.status.success(), "{}", stderr(&o));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn empty_input_exits_2() {
    let dir = TempDir::new().unwrap();
    for (name, text) in [("empty.csv", ""), ("header.csv", "x,y\n")] {
        let p = write(&dir, name, text);
        let o = run(&["analyze", "--input", path_str(&p)]);
        assert_eq!(o.status.code(), Some(2));
        assert!(stderr(&o).contains("empty input"), "{}", stderr(&o));
    }
}

#[test]
fn theta_with_unknown_margins_exits_2() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "d.csv", "x,y\n0.1,0.2\n0.5,\n");
    let o = run(&["analyze", "--input", path_str(&p), "--margins", "unknown", "--theta", "0.4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("theta requires known margins"));
}

#[test]
fn io_and_validation_exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.csv");
    assert_eq!(run(&["analyze", "--input", path_str(&missing)]).status.code(), Some(1));

    let bad = write(&dir, "bad.csv", "x,y\n0.1,0.2\n0.3,oops\n");
    let o = run(&["analyze", "--input", path_str(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let out_of_range = write(&dir, "range.csv", "x,y\n0.1,1.5\n");
    assert_eq!(run(&["analyze", "--input", path_str(&out_of_range)]).status.code(), Some(2));

    assert_eq!(run(&["analyze", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["reproduce", "--draws", "9999"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--n", "10"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--scenario", "P9", "--n", "10"]).status.code(), Some(2));
    assert_eq!(
        run(&["simulate", "--rho", "0", "--gamma", "1,2,3", "--n", "10"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["simulate", "--rho", "1.5", "--gamma", "zeros", "--n", "10"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["--workers", "0", "reproduce"]).status.code(), Some(2));

    let unwritable = dir.path().join("no/such/dir/out.csv");
    let o = run(&["simulate", "--scenario", "P1", "--n", "5", "--output", path_str(&unwritable)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_is_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = simulate_to(&dir, "a.csv", &["--scenario", "P3", "--n", "1000", "--seed", "7"]);
    let b = simulate_to(&dir, "b.csv", &["--scenario", "P3", "--n", "1000", "--seed", "7"]);
    let c = simulate_to(&dir, "c.csv", &["--scenario", "P3", "--n", "1000", "--seed", "8"]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
    let text = fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("x,y\n"));
    assert_eq!(text.lines().count(), 1001);
}

#[test]
fn uniform_softmax_frequencies() {
    let dir = TempDir::new().unwrap();
    let p = simulate_to(&dir, "u.csv", &["--rho", "0", "--gamma", "zeros", "--n", "100000"]);
    let sd = (0.25f64 * 0.75 / 100_000.0).sqrt();
    for f in pattern_fractions(&p) {
        assert!((f - 0.25).abs() < 4.0 * sd, "{f}");
    }
}

#[test]
fn complete_case_fraction_matches_population() {
    let dir = TempDir::new().unwrap();
    let p = simulate_to(&dir, "p1.csv", &["--scenario", "P1", "--n", "100000"]);
    let pop = population_bounds(
        &BenchmarkScenario::P1.config(CovariateScale::Uniform01),
        BenchmarkScenario::P1.theta(),
        1_000_000,
        1,
    )
    .unwrap();
    let f = pattern_fractions(&p)[0];
    let p1 = pop.p[0];
    let sd = (p1 * (1.0 - p1) / 100_000.0 + pop.p_se[0].powi(2)).sqrt();
    assert!((f - p1).abs() < 3.0 * sd, "{f} vs {p1} (sd {sd})");
}

#[test]
fn report_validates_against_published_schema() {
    let dir = TempDir::new().unwrap();
    let data = simulate_to(&dir, "d.csv", &["--scenario", "P2", "--n", "2000", "--seed", "4"]);
    let schema: Value = serde_json::from_str(
        &fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/schema/report.schema.json")).unwrap(),
    )
    .unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    for args in [
        vec!["--margins", "uniform01"],
        vec!["--margins", "uniform01", "--theta", "0.4", "--guard-k", "2"],
        vec!["--margins", "unknown"],
    ] {
        let mut full = vec!["--input", path_str(&data)];
        full.extend(args);
        let v = analyze_json(&full);
        assert!(validator.is_valid(&v), "{v}");
        assert_eq!(v["n"], 2000);
        assert_eq!(v["tool_version"], env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn file_margins_match_uniform_for_identity_tables() {
    let dir = TempDir::new().unwrap();
    let data = simulate_to(&dir, "d.csv", &["--scenario", "P3", "--n", "3000", "--seed", "2"]);
    let table = write(&dir, "t.csv", "value,cdf\n0,0\n0.5,0.5\n1,1\n");
    let a = analyze_json(&["--input", path_str(&data), "--theta", "0.25"]);
    let b = analyze_json(&[
        "--input", path_str(&data), "--theta", "0.25", "--margins", "file",
        "--x-cdf", path_str(&table), "--y-cdf", path_str(&table),
    ]);
    assert_eq!(a["worst_case"], b["worst_case"]);
    assert_eq!(a["refined"], b["refined"]);
    assert_eq!(b["margins_mode"], "file");

    let o = run(&["analyze", "--input", path_str(&data), "--margins", "file", "--x-cdf", path_str(&table)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn plain_format_and_output_file() {
    let dir = TempDir::new().unwrap();
    let data = write(&dir, "d.csv", "x,y\n0.1,0.1\n0.4,NA\n,0.7\n0.9,0.8\n");
    let out = dir.path().join("r.txt");
    let o = run(&["analyze", "--input", path_str(&data), "--format", "plain", "--output", path_str(&out)]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("worst case"));
    assert!(text.contains("decision"));
}

#[test]
fn population_report_alongside_dataset() {
    let dir = TempDir::new().unwrap();
    let rep = dir.path().join("pop.json");
    simulate_to(
        &dir,
        "d.csv",
        &["--scenario", "P2", "--n", "100", "--population-report", path_str(&rep), "--draws", "20000"],
    );
    let v: Value = serde_json::from_str(&fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(v["draws"], 20000);
    assert_eq!(v["theta"], 0.4);
    let lo = v["refined"]["lower"].as_f64().unwrap();
    assert!(lo >= v["worst_case"]["lower"].as_f64().unwrap());
}

#[test]
fn reproduce_json_shape() {
    let o = run(&["reproduce", "--draws", "20000", "--format", "json", "--strict"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["tolerance"], 0.005);
    let conv = v["conventions"].as_array().unwrap();
    assert_eq!(conv.len(), 2);
    assert_eq!(conv[0]["covariate_scale"], "uniform01");
    assert_eq!(conv[1]["covariate_scale"], "normal-score");
    for c in conv {
        let names: Vec<&str> = c["scenarios"].as_array().unwrap().iter().map(|s| s["scenario"].as_str().unwrap()).collect();
        assert_eq!(names, ["P1", "P2", "P3"]);
    }
    assert!(v["matched_conventions"].is_array());
}

#[test]
fn workers_flag_and_env_do_not_change_output() {
    let a = bin().args(["--workers", "1", "reproduce", "--draws", "20000"]).output().unwrap();
    let b = bin().env("TAUBOUNDS_WORKERS", "8").args(["reproduce", "--draws", "20000"]).output().unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

// The decision from a large simulated dataset should agree with the decision
// from the population bounds of the model that generated it.
#[test]
fn simulate_then_analyze_matches_population_decision() {
    let dir = TempDir::new().unwrap();
    for s in [BenchmarkScenario::P1, BenchmarkScenario::P2] {
        let data = simulate_to(&dir, &format!("{}.csv", s.name()), &["--scenario", s.name(), "--n", "1000000", "--seed", "3"]);
        let v = analyze_json(&["--input", path_str(&data), "--theta", "0.4"]);
        let pop = population_bounds(&s.config(CovariateScale::Uniform01), s.theta(), 2_000_000, 3).unwrap();
        let expected = decide(&clip(&pop.refined).unwrap());
        assert_eq!(v["decision"], expected.as_str(), "{}", s.name());
    }
}
