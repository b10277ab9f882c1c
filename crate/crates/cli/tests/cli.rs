use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn polycert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polycert")).args(args).output().expect("runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

fn bound_of(o: &Output) -> f64 {
    let text = stdout(o);
    let line = text.lines().find_map(|l| l.strip_prefix("bound ")).unwrap_or_else(|| panic!("{text}"));
    match line {
        "-inf" => f64::NEG_INFINITY,
        v => v.parse().unwrap(),
    }
}

#[test]
fn verify_sparse_fixture() {
    let o = polycert(&["verify", path(&fixture("sparse_example.cert.json")), path(&fixture("sparse_example.json"))]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().next(), Some("exact-pass"));
}

#[test]
fn verify_cdt_fixture() {
    let o = polycert(&["verify", path(&fixture("cdt_3.cert.json")), path(&fixture("cdt_3.json"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("exact-pass"));
}

#[test]
fn tampered_certificate_fails_with_code_4() {
    let text = std::fs::read_to_string(fixture("sparse_example.cert.json")).unwrap();
    let bad = text.replacen("\"lambda\": \"0/1\"", "\"lambda\": \"1/1\"", 1);
    assert_ne!(bad, text);
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("bad.json");
    std::fs::write(&cert, bad).unwrap();
    let o = polycert(&["verify", path(&cert), path(&fixture("sparse_example.json"))]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).starts_with("fail"));
}

#[test]
fn lp_bound_on_cdt_is_non_negative() {
    let o = polycert(&["solve", "--hierarchy", "lp", "--rank", "3", path(&fixture("cdt_3.json"))]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let b = bound_of(&o);
    assert!(b >= -1e-9, "{b}");
}

#[test]
fn gen_rejects_odd_n() {
    let o = polycert(&["gen", "--n", "5", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn gen_and_solve_are_reproducible() {
    let a = polycert(&["gen", "--n", "4", "--seed", "7", "--obj-deg", "2"]);
    let b = polycert(&["gen", "--n", "4", "--seed", "7", "--obj-deg", "2"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("4_7.json");
    std::fs::write(&file, &a.stdout).unwrap();
    let s1 = polycert(&["solve", "--hierarchy", "lp", "--rank", "3", path(&file)]);
    let s2 = polycert(&["solve", "--hierarchy", "lp", "--rank", "3", path(&file)]);
    assert_eq!(s1.status.code(), Some(0));
    assert_eq!(s1.stdout, s2.stdout);
    assert!(bound_of(&s1).is_finite());
}

#[test]
fn certify_output_verifies() {
    let dir = tempfile::tempdir().unwrap();
    for (h, rank, problem) in [("lp", "3", "cdt_3.json"), ("sparse", "4", "sparse_example.json"), ("lasserre", "4", "cdt_3.json")] {
        let cert = dir.path().join(format!("{h}.json"));
        let o = polycert(&["certify", "--hierarchy", h, "--rank", rank, "-o", path(&cert), path(&fixture(problem))]);
        assert_eq!(o.status.code(), Some(0), "{h}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(cert.exists(), "{h}: {}", stdout(&o));
        let v = polycert(&["verify", path(&cert), path(&fixture(problem))]);
        assert_eq!(v.status.code(), Some(0), "{h}: {}", stdout(&v));
    }
}

#[test]
fn malformed_problem_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    std::fs::write(&file, "{\"format\": \"polycert-problem\"").unwrap();
    let o = polycert(&["solve", "--hierarchy", "lp", "--rank", "2", path(&file)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_bounds_are_an_input_error() {
    let o = polycert(&["solve", "--hierarchy", "lp", "--rank", "3", path(&fixture("simpleex.json"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn copositive_splits_free_variables() {
    // min x² − x on [−1, 1] with x free
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("interval.json");
    let text = r#"{"format": "polycert-problem", "version": 1, "name": "interval", "nvars": 1,
                   "objective": ["1/1 2", "-1/1 1"], "constraints": [["1/1 0", "-1/1 2"]],
                   "nonneg": false, "bounds": {}}"#;
    std::fs::write(&file, text).unwrap();
    let o = polycert(&["solve", "--hierarchy", "copositive", "--rank", "4", path(&file)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let b = bound_of(&o);
    assert!(b.is_finite() && b <= -0.25 + 1e-6, "{b}");
}

#[test]
fn memory_guard_refuses_large_programs() {
    let o = polycert(&["solve", "--hierarchy", "copositive", "--rank", "8", "--max-entries", "20000000", path(&fixture("netzer_2.json"))]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("program too large"));
}

#[test]
fn bench_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("grid.json");
    std::fs::write(&cfg, r#"{"cases": [{"n": 4, "seed": 2, "obj_deg": 2}], "hierarchies": ["lp"], "ranks": [3, 2]}"#).unwrap();
    let csv = dir.path().join("out.csv");
    let json = dir.path().join("out.json");
    let o = polycert(&["bench", "--config", path(&cfg), "--csv", path(&csv), "--json", path(&json)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "case,hierarchy,rank,deg_sigma0,bound,wall_time,status");
    assert!(lines[1].starts_with("4_2,lp,2,") && lines[2].starts_with("4_2,lp,3,"), "{text}");
    let rows: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
}

#[test]
fn empty_bench_prints_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.json");
    std::fs::write(&cfg, "{}").unwrap();
    let o = polycert(&["bench", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "case,hierarchy,rank,deg_sigma0,bound,wall_time,status\n");
}
