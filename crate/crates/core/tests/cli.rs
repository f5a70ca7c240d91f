use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gsts_core::cli::{rows_from_csv, rows_to_csv, ReportRow};
use gsts_core::problem::{load_system, StokesConfig};

fn gsts(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsts")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert!(gsts(&["generate", "--l", "4", "--nu", "0.01", "--out", path(d)]).status.success());
    }
    for f in ["M.mtx", "E.mtx", "f.vec", "manifest.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let manifest = fs::read_to_string(a.join("manifest.txt")).unwrap();
    assert!(manifest.lines().any(|l| l == "p=24"));
    assert!(manifest.lines().any(|l| l == "q=16"));
}

#[test]
fn generated_benchmark_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    assert!(gsts(&["generate", "--l", "25", "--nu", "0.01", "--out", path(dir.path())]).status.success());
    let (sys, _) = load_system(dir.path()).unwrap();
    let cfg = StokesConfig::new(25, 0.01).unwrap();
    assert_eq!((sys.p(), sys.q()), (cfg.p(), cfg.q()));
    sys.validate().unwrap();
    let o = gsts(&[
        "run", "--input", path(dir.path()), "--method", "gsts-i", "--omega", "0.99", "--tau", "1.0",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("| gsts-i |"));
}

#[test]
fn run_appends_csv_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.csv");
    for tau in ["0.3", "0.4"] {
        let o = gsts(&[
            "run", "--l", "6", "--nu", "0.01", "--method", "gsts-ii", "--omega", "0.01", "--tau", tau,
            "--out", path(&out),
        ]);
        assert!(o.status.success());
    }
    let rows = rows_from_csv(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1].tau, Some(0.4));
    let again: Vec<ReportRow> = rows_from_csv(&rows_to_csv(&rows).unwrap()).unwrap();
    assert_eq!(again, rows);
    let md = fs::read_to_string(out.with_extension("md")).unwrap();
    assert_eq!(md.lines().count(), 4);
}

#[test]
fn qmr_is_reported_unsupported() {
    let o = gsts(&["run", "--l", "3", "--method", "qmr"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn one_point_grid_file_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    fs::write(&grid, "col1,col2\n0.5,0.6\n").unwrap();
    let o = gsts(&["sweep", "--l", "4", "--method", "gsts-ii", "--grid-file", path(&grid)]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("0.5,0.6,"));
}

#[test]
fn empty_grid_file_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    fs::write(&grid, "col1,col2\n").unwrap();
    let o = gsts(&["sweep", "--l", "4", "--method", "gsts-ii", "--grid-file", path(&grid)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_output_is_deterministic() {
    let args = ["analyze", "--l", "3", "--method", "gsts-i", "--omega", "1", "--tau", "1"];
    let (a, b) = (gsts(&args), gsts(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("semiconvergent: yes"));
    let too_big = gsts(&["analyze", "--l", "13", "--method", "gsts-i", "--omega", "1", "--tau", "1"]);
    assert_eq!(too_big.status.code(), Some(2));
}
