use std::path::{Path, PathBuf};
use std::process::Command;

use powcap::cli::run;
use powcap::ScenarioConfig;
use tempfile::TempDir;

const SYMMETRIC: &str = r#"
kind = "macro_diversity"
n = 3
k = 2
alphas = [0.99, 0.99, 0.99]
gains = [[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]
sigma = 1.0
"#;

const ASYMMETRIC: &str = r#"
kind = "macro_diversity"
n = 3
k = 2
alphas = [0.5, 0.5, 0.5]
gains = [[2.0, 1.0], [1.0, 2.0], [1.0, 1.0]]
sigma = 1.0
"#;

const SINGLE_CELL: &str = r#"
kind = "single_cell"
coordinates = "received"
alphas = [0.3, 0.4]
sigma = 1.0
"#;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn powcap(args: &[&str]) -> Out {
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("powcap").chain(args.iter().copied()), &mut o, &mut e);
    Out { code, stdout: String::from_utf8(o).unwrap(), stderr: String::from_utf8(e).unwrap() }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn p_star(stdout: &str) -> &str {
    stdout.lines().find(|l| l.starts_with("p* = ")).unwrap()
}

fn p_star_values(stdout: &str) -> Vec<f64> {
    let inner = p_star(stdout).trim_start_matches("p* = (").trim_end_matches(')');
    inner.split(", ").map(|v| v.parse().unwrap()).collect()
}

#[test]
fn check_symmetric_point() {
    let dir = TempDir::new().unwrap();
    let ok = powcap(&["check", s(&write(&dir, "a.toml", SYMMETRIC))]);
    assert_eq!(ok.code, 0, "{}", ok.stderr);
    assert!(ok.stdout.contains("0.99"), "{}", ok.stdout);

    let at_one = SYMMETRIC.replace("0.99, 0.99, 0.99", "1.0, 1.0, 1.0");
    assert_eq!(powcap(&["check", s(&write(&dir, "b.toml", &at_one))]).code, 2);
}

#[test]
fn check_json_report() {
    let dir = TempDir::new().unwrap();
    let r = powcap(&["--json", "check", s(&write(&dir, "a.toml", SYMMETRIC))]);
    assert_eq!(r.code, 0);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["report"]["lambda"].as_f64().unwrap(), 0.99);
    assert_eq!(v["report"]["feasible"], serde_json::Value::Bool(true));
}

#[test]
fn malformed_config_exits_one_with_line() {
    let dir = TempDir::new().unwrap();
    let bad = SYMMETRIC.replace("[1.0, 1.0], [1.0, 1.0]]", "[1.0, 1.0], [1.0, oops]]");
    let r = powcap(&["check", s(&write(&dir, "bad.toml", &bad))]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("line"), "{}", r.stderr);

    let ragged = SYMMETRIC.replace("[1.0, 1.0], [1.0, 1.0]]", "[1.0, 1.0], [1.0]]");
    assert_eq!(powcap(&["check", s(&write(&dir, "ragged.toml", &ragged))]).code, 1);
    assert_eq!(powcap(&["check", s(&dir.path().join("missing.toml"))]).code, 1);
}

#[test]
fn solve_two_terminal_single_cell() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "sc.toml", SINGLE_CELL);
    let r = powcap(&["solve", s(&cfg), "--tolerance", "1e-13"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(p_star(&r.stdout), "p* = (0.477272727273, 0.590909090909)");
}

#[test]
fn solve_is_independent_of_start() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "a.toml", ASYMMETRIC);
    let tol = 1e-10;
    let solve_from = |init: &str| powcap(&["solve", s(&cfg), "--init", init, "--tolerance", "1e-10"]);
    let a = solve_from("0");
    assert_eq!(a.code, 0);
    let pa = p_star_values(&a.stdout);
    for init in ["100", "5,0.1,40"] {
        let pb = p_star_values(&solve_from(init).stdout);
        for (x, y) in pa.iter().zip(&pb) {
            assert!((x - y).abs() <= 2.0 * tol + 1e-11 * x.abs(), "{x} vs {y}");
        }
    }
    assert_eq!(powcap(&["solve", s(&cfg), "--init", "1,2"]).code, 1);
}

#[test]
fn infeasible_solve_does_not_iterate() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "sc.toml", &SINGLE_CELL.replace("0.3, 0.4", "1.5, 2.0"));
    let trace = dir.path().join("trace.csv");
    let r = powcap(&["solve", s(&cfg), "--trace", s(&trace)]);
    assert_eq!(r.code, 2);
    assert!(!r.stdout.contains("p* ="));
    assert!(!trace.exists());
}

#[test]
fn forced_divergence_exits_three_with_trace() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "sc.toml", &SINGLE_CELL.replace("0.3, 0.4", "1.5, 2.0"));
    let trace = dir.path().join("trace.csv");
    let r = powcap(&["solve", s(&cfg), "--force", "--max-iter", "50", "--trace", s(&trace)]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stderr.contains("no convergence"));
    let text = std::fs::read_to_string(&trace).unwrap();
    // header plus iterations 0..=50
    assert_eq!(text.lines().count(), 52, "{text}");
}

#[test]
fn forced_uncertified_run_that_converges() {
    // single-cell condition in received powers is only sufficient
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "sc.toml", &SINGLE_CELL.replace("0.3, 0.4", "1.2, 0.1"));
    assert_eq!(powcap(&["check", s(&cfg)]).code, 2);
    let r = powcap(&["solve", s(&cfg), "--force"]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.contains("warning: uncertified"), "{}", r.stdout);
}

#[test]
fn region_asymmetric_is_incomparable() {
    let dir = TempDir::new().unwrap();
    let r = powcap(&["region", s(&write(&dir, "a.toml", ASYMMETRIC)), "--compare", "hanly"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("relation: incomparable"), "{}", r.stdout);
    assert!(r.stdout.contains("witness in scenario only: ("));
    assert!(r.stdout.contains("witness in hanly(K=2) only: ("));
    assert!(!r.stdout.contains("warning"));
}

#[test]
fn region_symmetric_contains_hanly() {
    let dir = TempDir::new().unwrap();
    let r = powcap(&["region", s(&write(&dir, "a.toml", SYMMETRIC)), "--compare", "hanly", "--resolution", "21"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("relation: hanly(K=2) ⊂ scenario"), "{}", r.stdout);
    assert!(r.stdout.contains("witness in scenario only: (0.9, 0.9, 0.9)"), "{}", r.stdout);

    let j =
        powcap(&["--json", "region", s(&write(&dir, "b.toml", SYMMETRIC)), "--compare", "hanly", "--resolution", "21"]);
    let v: serde_json::Value = serde_json::from_str(&j.stdout).unwrap();
    assert_eq!(v["comparison"]["witnesses_verified"], serde_json::Value::Bool(true));
    assert!(v["comparison"]["baseline_only"].is_null());
}

#[test]
fn region_smoke_csv() {
    let dir = TempDir::new().unwrap();
    let cloud = dir.path().join("cloud.csv");
    let r = powcap(&["region", s(&write(&dir, "a.toml", SYMMETRIC)), "--resolution", "2", "--out", s(&cloud)]);
    assert_eq!(r.code, 0);
    let text = std::fs::read_to_string(&cloud).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert_eq!(lines[0], "alpha_1,alpha_2,alpha_3,feasible");
}

#[test]
fn region_inequalities_export() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("ineq.csv");
    let r = powcap(&["region", s(&write(&dir, "a.toml", ASYMMETRIC)), "--resolution", "3", "--inequalities", s(&path)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    // three terminals times two receivers, no header
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().all(|l| l.ends_with(",1,<")), "{text}");
}

#[test]
fn region_dimension_guard() {
    let dir = TempDir::new().unwrap();
    let five = "kind = \"single_cell\"\nalphas = [0.1, 0.1, 0.1, 0.1, 0.1]\nsigma = 1.0\n";
    let cfg = write(&dir, "five.toml", five);
    assert_eq!(powcap(&["region", s(&cfg), "--resolution", "2"]).code, 1);
    assert_eq!(powcap(&["region", s(&cfg), "--resolution", "2", "--force-dim"]).code, 0);
}

#[test]
fn axioms_commands() {
    let r = powcap(&["axioms", "--function", "holder:2", "--dim", "3"]);
    assert_eq!(r.code, 0, "{}", r.stdout);

    let r = powcap(&["axioms", "--function", "squared-l1", "--dim", "1"]);
    assert_eq!(r.code, 2);
    let line = r.stdout.lines().find(|l| l.contains("sub-additivity")).unwrap();
    assert!(line.contains("FAIL") && line.contains("x=[1.0] y=[1.0]"), "{line}");

    assert_eq!(powcap(&["axioms", "--function", "weighted:0.66667,0.33333,0.5"]).code, 0);
    assert_eq!(powcap(&["axioms", "--function", "cubic", "--dim", "2"]).code, 1);
}

#[test]
fn axioms_norm_of_norms_file() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "f.toml", "inner = [[1.0, 0.5], [0.5, 1.0]]\n");
    let r = powcap(&["axioms", "--function", &format!("norm-of-norms:{}", s(&f)), "--samples", "500"]);
    assert_eq!(r.code, 0, "{}{}", r.stdout, r.stderr);
}

#[test]
fn config_round_trip_through_disk() {
    let dir = TempDir::new().unwrap();
    for text in [SYMMETRIC, ASYMMETRIC, SINGLE_CELL] {
        let a = ScenarioConfig::load(&write(&dir, "a.toml", text)).unwrap();
        let b = ScenarioConfig::load(&write(&dir, "b.toml", &a.to_toml().unwrap())).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_model().unwrap(), b.to_model().unwrap());
    }
}

#[test]
fn binary_exit_codes() {
    let dir = TempDir::new().unwrap();
    let exe = env!("CARGO_BIN_EXE_powcap");
    let code = |args: &[&str]| Command::new(exe).args(args).output().unwrap().status.code().unwrap();
    assert_eq!(code(&["check", s(&write(&dir, "a.toml", SYMMETRIC))]), 0);
    assert_eq!(code(&["check", s(&write(&dir, "b.toml", &SYMMETRIC.replace("0.99", "1.0")))]), 2);
    assert_eq!(code(&["check", "/nonexistent.toml"]), 1);
    assert_eq!(
        code(&[
            "solve",
            s(&write(&dir, "c.toml", &SINGLE_CELL.replace("0.3, 0.4", "1.5, 2.0"))),
            "--force",
            "--max-iter",
            "10"
        ]),
        3
    );
}
