use std::path::PathBuf;
use std::process::{Command, Output};

use gridmargin::report::StrengthReport;

fn case(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "..", "..", "cases", name]
        .iter()
        .collect()
}

fn gridmargin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridmargin"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn solve_prints_the_table() {
    let a = case("two_ibr_a.json");
    let out = gridmargin(&["solve", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let bus3 = text
        .lines()
        .find(|l| l.trim_start().starts_with("3 "))
        .unwrap();
    assert!(bus3.contains("84.75"), "{bus3}");
    assert!(text.contains("no Q limits"));
}

#[test]
fn sweep_puts_scr_and_pmr_side_by_side() {
    let a = case("two_ibr_a.json");
    let out = gridmargin(&["sweep", a.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let row = text.lines().find(|l| l.starts_with("3,")).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[2], "1.0370");
    let pmr: f64 = cols[5].parse().unwrap();
    assert!((pmr - 1.2).abs() <= 0.05);
}

#[test]
fn missing_case_is_an_input_error() {
    let out = gridmargin(&["pmr", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("case file not found"));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_case_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\n  \"buses\": [\n    {\"id\": }\n  ]\n}\n").unwrap();
    let out = gridmargin(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn fold_without_bus_is_an_input_error() {
    let b = case("two_ibr_b.json");
    assert_eq!(
        gridmargin(&["fold", b.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn diverging_base_case_is_a_study_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("heavy.json");
    let text = std::fs::read_to_string(case("spib.json"))
        .unwrap()
        .replace("\"p_set_pu\": 1.0", "\"p_set_pu\": 1.5");
    std::fs::write(&path, text).unwrap();
    let out = gridmargin(&["pmr", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("base case does not converge"));
    let out = gridmargin(&["solve", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("converged: false"));
}

#[test]
fn output_is_deterministic() {
    let b = case("two_ibr_b.json");
    for format in ["csv", "json"] {
        let args = ["sweep", b.to_str().unwrap(), "--format", format, "--trace"];
        let first = gridmargin(&args);
        let second = gridmargin(&args);
        assert_eq!(first.stdout, second.stdout, "{format}");
    }
}

#[test]
fn json_round_trips_exactly() {
    let b = case("two_ibr_b.json");
    let out = gridmargin(&["sweep", b.to_str().unwrap(), "--format", "json"]);
    let text = stdout(&out);
    let report: StrengthReport = serde_json::from_str(&text).unwrap();
    let again = serde_json::to_string_pretty(&report).unwrap() + "\n";
    assert_eq!(again, text);
    let row = report.row(2).unwrap();
    assert_eq!(
        row.pmr.unwrap(),
        row.p_max.unwrap() / row.denominator.unwrap()
    );
}

#[test]
fn output_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let b = case("two_ibr_b.json");
    let out = gridmargin(&[
        "distance-curve",
        b.to_str().unwrap(),
        "--bus",
        "2",
        "--format",
        "csv",
        "--lambda-grid",
        "-0.1,-0.01",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "lambda,d_estimated,d_exact,relative_error"
    );
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn help_mentions_degrees() {
    let out = gridmargin(&["--help"]);
    assert!(stdout(&out).contains("degrees"));
}

#[test]
fn unknown_bus_is_an_input_error() {
    let a = case("two_ibr_a.json");
    let out = gridmargin(&["pmr", a.to_str().unwrap(), "--bus", "9"]);
    assert_eq!(out.status.code(), Some(2));
}
