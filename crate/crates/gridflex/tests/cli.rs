mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::*;

fn gridflex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridflex")).args(args).output().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn validate_lists_cell_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_study(dir.path());
    let out = gridflex(&["validate", "--config", p(&cfg)]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    for line in ["base: 3 cells", "siting: 6 cells", "penetration: 9 cells", "load-curves: 6 cells", "generation-mix: 6 cells"] {
        assert!(stdout.contains(line), "{stdout}");
    }
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"scenarios\": 2,\n  \"facts_set\": []\n}\n").unwrap();
    let out = gridflex(&["validate", "--config", p(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr);
    assert!(err.contains("facts_set") && err.contains("line 3"), "{err}");

    std::fs::write(&cfg, r#"{"facts_sets": [["A99"]]}"#).unwrap();
    let out = gridflex(&["run", "base", "--config", p(&cfg), "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("A99"));

    let out = gridflex(&["run", "nonsense", "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2), "clap rejects unknown studies");
    assert!(text(&out.stderr).contains("nonsense"));
}

#[test]
fn run_writes_reports_and_signals_failed_cells() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_study(dir.path());
    let out_dir = dir.path().join("out");
    let out = gridflex(&["run", "base", "--config", p(&cfg), "--out", p(&out_dir), "--seed", "7", "--workers", "2"]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("base: 3 cells, 0 failed"));
    for f in ["report.json", "report.csv", "timings.json"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["metadata"]["seed"], 7);

    let mut case = small_case();
    case.load_curve = vec![2000.0; 24];
    gridflex::io::save_case(&case, &dir.path().join("case.json")).unwrap();
    let out = gridflex(&["run", "base", "--config", p(&cfg), "--out", p(&dir.path().join("bad"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stdout).contains("3 failed"));
}

#[test]
fn exported_case_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rts.json");
    let out = gridflex(&["export-case", "--out", p(&path)]);
    assert!(out.status.success());
    let case = gridflex::io::load_case(&path).unwrap();
    assert_eq!(case, gridflex::data::build_rts96_modified());
}

#[test]
fn external_flag_needs_a_configured_solver() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_study(dir.path());
    let out = gridflex(&["run", "base", "--config", p(&cfg), "--out", p(dir.path()), "--external-solver"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("external_solver"));
}
