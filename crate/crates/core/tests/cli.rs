mod common;

use std::process::{Command, Output};

use common::fixture;

fn flatband(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatband"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> (String, String) {
    let out = flatband(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    (
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

#[test]
fn bands_summary_for_the_magnetic_chain() {
    let (stdout, _) = run_ok(&["bands", "--graph", &path("ex2.json")]);
    assert!(stdout.contains("band 1: [2, 2] FLAT"), "{stdout}");
    assert!(stdout.contains("band 2: [4, 4] FLAT"), "{stdout}");
}

#[test]
fn bands_csv_to_stdout_moves_summary_to_stderr() {
    let (stdout, stderr) = run_ok(&[
        "bands",
        "--graph",
        &path("zlattice.json"),
        "--grid",
        "8",
        "--out",
        "-",
    ]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "k1,lambda1");
    assert_eq!(lines.len(), 9);
    assert_eq!(lines[1], "0,0");
    assert!(stderr.contains("band 1:"));
}

#[test]
fn bands_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("bands.csv");
    let (stdout, _) = run_ok(&[
        "bands",
        "--graph",
        &path("square.json"),
        "--grid",
        "4",
        "--out",
        target.to_str().unwrap(),
    ]);
    assert!(stdout.contains("band 1:"));
    let csv = std::fs::read_to_string(&target).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k1,k2,lambda1"));
    assert_eq!(lines.count(), 16);
}

#[test]
fn flat_check_certificate_for_the_lattice() {
    let (stdout, _) = run_ok(&["flat-check", "--graph", &path("zlattice.json")]);
    assert!(stdout.contains("verdict: AC_NONEMPTY"), "{stdout}");
    assert!(stdout.contains("certificate: (1, [-1], -1)"), "{stdout}");
}

#[test]
fn flat_check_accepts_both_flat_examples() {
    for name in ["ex1.json", "ex2.json"] {
        let (stdout, _) = run_ok(&["flat-check", "--graph", &path(name)]);
        assert!(stdout.contains("verdict: FLAT"), "{name}: {stdout}");
    }
}

#[test]
fn trace_coefficients_csv() {
    let (stdout, _) = run_ok(&["trace-coeffs", "--graph", &path("ex2.json"), "--n-max", "2"]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "n,gamma1,re,im");
    assert!(lines.contains(&"1,0,6,0"));
    assert!(lines.contains(&"2,0,20,0"));
    assert!(lines.contains(&"2,1,0,0"));
}

#[test]
fn sweep_reports_the_unit_coupling_zero() {
    let (stdout, _) = run_ok(&["sweep", "--graph", &path("ex2.json")]);
    assert!(stdout.contains("witness: n = 2, gamma = [-1]"), "{stdout}");
    assert!(stdout.contains("verdict: FLAT"), "{stdout}");
    assert!(stdout.contains("except t = 1"), "{stdout}");

    let (csv, _) = run_ok(&["sweep", "--graph", &path("ex2.json"), "--out", "-"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t_zero,verdict,n,gamma1,abs_f");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("1,FLAT,2,-1,"));
}

#[test]
fn verify_passes_on_the_fixtures() {
    for name in ["ex1.json", "ex2.json", "zlattice.json", "square.json"] {
        let (stdout, _) = run_ok(&["verify", "--graph", &path(name)]);
        assert!(stdout.contains("result: PASS"), "{name}: {stdout}");
    }
}

#[test]
fn input_errors_exit_with_one() {
    let missing = flatband(&["bands", "--graph", "/nonexistent/graph.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("error"));

    let zero = flatband(&["trace-coeffs", "--graph", &path("ex2.json"), "--n-max", "0"]);
    assert_eq!(zero.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.json");
    let text = std::fs::read_to_string(fixture("ex2.json")).unwrap();
    std::fs::write(&broken, &text[..text.len() / 2]).unwrap();
    let corrupt = flatband(&["flat-check", "--graph", broken.to_str().unwrap()]);
    assert_eq!(corrupt.status.code(), Some(1));

    let unknown = text.replacen("\"v0\"", "\"w0\"", 1);
    std::fs::write(&broken, unknown).unwrap();
    let dangling = flatband(&["bands", "--graph", broken.to_str().unwrap()]);
    assert_eq!(dangling.status.code(), Some(1));

    assert_eq!(flatband(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = [
        "bands",
        "--graph",
        &path("square.json"),
        "--grid",
        "16",
        "--out",
        "-",
    ];
    let a = flatband(&args);
    let b = flatband(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);

    let args = ["trace-coeffs", "--graph", &path("ex1.json"), "--n-max", "3"];
    assert_eq!(flatband(&args).stdout, flatband(&args).stdout);
}
