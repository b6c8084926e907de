use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cartan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cartan")).args(args).env_remove("CARTAN_STORE").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn status(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn terms_of(text: &str) -> BTreeSet<String> {
    text.split(" + ").map(|t| t.trim().to_string()).collect()
}

#[test]
fn computes_delta_2_for_p3() {
    let o = cartan(&["invariant-compute", "--algebra", "Hbar", "--p", "3", "--n", "2", "--m", "1,1", "--power", "2"]);
    assert_eq!(status(&o), 0);
    let out = stdout(&o);
    let line = out.lines().next().unwrap();
    let (label, poly) = line.split_once(" = ").unwrap();
    assert_eq!(label, "Delta_2");
    let expected = terms_of("2*u_{0,1}*u_{2,1} + 2*u_{1,0}*u_{1,2} + u_{1,1}^2 + 2*u_{0,2}*u_{2,0}");
    assert_eq!(terms_of(poly), expected);
    assert!(out.contains("terms = 4"));
}

#[test]
fn stored_record_verifies_and_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_str().unwrap();
    let o = cartan(&["invariant-compute", "--p", "5", "--power", "6", "--store", root]);
    assert_eq!(status(&o), 0);
    let path = dir.path().join("p5_n2_m1-1").join("Delta_6_star.json");
    let o = cartan(&["invariant-verify", "--input", path.to_str().unwrap()]);
    assert_eq!(status(&o), 0);
    assert_eq!(stdout(&o), "Delta_6_star: 708 terms, invariant: yes\n");

    let mut doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let c = &mut doc["invariant"]["terms"][0]["coefficient"];
    *c = serde_json::Value::from(c.as_i64().unwrap() % 4 + 1);
    fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let o = cartan(&["invariant-verify", "--input", path.to_str().unwrap()]);
    assert_eq!(status(&o), 1);
    assert!(stdout(&o).contains("invariant: no"));
}

#[test]
fn store_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cartan"))
        .args(["invariant-compute", "--p", "3", "--power", "2"])
        .env("CARTAN_STORE", dir.path())
        .output()
        .unwrap();
    assert_eq!(status(&o), 0);
    assert!(dir.path().join("p3_n2_m1-1").join("Delta_2.json").exists());
}

fn write_poly_doc(dir: &Path, terms: serde_json::Value) -> String {
    let doc = serde_json::json!({
        "format": "cartan-sym", "version": 1, "kind": "H", "p": 3, "n": 2, "m": [1, 1],
        "signs": "pi=(1 2);a=+-", "ring": "modp", "variables": "basis", "terms": terms,
    });
    let path = dir.join("poly.json");
    fs::write(&path, doc.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verifies_polynomial_documents() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write_poly_doc(dir.path(), serde_json::json!([]));
    let o = cartan(&["invariant-verify", "--input", &zero]);
    assert_eq!(status(&o), 0);
    assert!(stdout(&o).ends_with("0 terms, invariant: yes\n"));

    // [D(1,1), D(0,1)] is a nonzero multiple of D(0,1).
    let var = write_poly_doc(dir.path(), serde_json::json!([{ "monomial": [["D(0,1)", 1]], "coefficient": 1 }]));
    let o = cartan(&["invariant-verify", "--input", &var]);
    assert_eq!(status(&o), 1);
    assert!(stdout(&o).contains("invariant: no"));
}

#[test]
fn generator_check_reports_a_grade_zero_witness() {
    let o = cartan(&["generator-check", "--algebra", "Hbar", "--p", "3", "--poly", "u_{1,1}"]);
    assert_eq!(status(&o), 1);
    let out = stdout(&o);
    let witness = out.lines().find(|l| l.starts_with("witness = ")).unwrap();
    assert!(witness.ends_with("(grade 0)"), "{witness}");

    let o = cartan(&["generator-check", "--algebra", "W", "--n", "1", "--p", "3", "--poly", "x^(2)d_1^2"]);
    assert_eq!(status(&o), 0);
    let o = cartan(&["generator-check", "--algebra", "W", "--n", "1", "--p", "3", "--poly", "x^(2)d_1"]);
    assert_eq!(status(&o), 1);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(status(&cartan(&["basis", "--algebra", "X", "--p", "3"])), 2);
    assert_eq!(status(&cartan(&["basis", "--algebra", "W"])), 2);
    assert_eq!(status(&cartan(&["basis", "--p", "4"])), 2);
    assert_eq!(status(&cartan(&["basis", "--p", "3", "--n", "2", "--m", "1"])), 2);
    assert_eq!(status(&cartan(&["invariant-compute", "--p", "3", "--power", "3"])), 2);
    assert_eq!(status(&cartan(&["invariant-compute", "--algebra", "W", "--p", "3", "--power", "2"])), 2);
    assert_eq!(status(&cartan(&["generator-check", "--p", "3", "--poly", "u_{9,9}"])), 2);
    assert_eq!(status(&cartan(&["conjecture", "--p", "5"])), 2);
}

#[test]
fn budget_exhaustion_exits_with_three() {
    let o = cartan(&["invariant-compute", "--p", "5", "--power", "6", "--max-terms", "50"]);
    assert_eq!(status(&o), 3);
    let o = cartan(&["conjecture", "--p", "5", "--max-terms", "100"]);
    assert_eq!(status(&o), 3);
    assert!(stdout(&o).contains("partial:"));
}

#[test]
fn structured_output_is_deterministic() {
    let args = ["invariant-compute", "--p", "5", "--power", "4", "--output", "structured"];
    let first = cartan(&args);
    let second = cartan(&args);
    let mut parallel_args = args.to_vec();
    parallel_args.extend(["--workers", "4"]);
    let parallel = cartan(&parallel_args);
    assert_eq!(status(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.stdout, parallel.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(doc["term_count"], 78);
}

#[test]
fn basis_and_bracket_table() {
    let o = cartan(&["basis", "--algebra", "Hbar", "--p", "5", "--output", "structured"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["basis"].as_array().unwrap().len(), 24);
    let o = cartan(&["basis", "--algebra", "H", "--p", "3"]);
    assert_eq!(stdout(&o).lines().count(), 1 + 7);

    let o = cartan(&["bracket-table", "--algebra", "H", "--p", "3"]);
    assert_eq!(status(&o), 0);
    let text = stdout(&o);
    assert!(!text.contains("[D(0,1), D(1,0)]"), "partial derivatives commute");
    let o = cartan(&["bracket-table", "--algebra", "H", "--p", "3", "--ring", "int", "--output", "structured"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["brackets"].as_array().unwrap().len(), text.lines().count());
    let o = cartan(&["bracket-table", "--algebra", "S", "--p", "3", "--output", "structured"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["format"], "cartan-structure");
}

#[test]
fn independence_traces_the_degree_four_dependency() {
    let o = cartan(&["independence", "--p", "5"]);
    assert_eq!(status(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("candidate Delta_2^2 lambda 16 (match)"));
    assert!(out.contains("candidate Delta_2^3 lambda 24"));
    assert!(out.contains("independent: 2 of 3"), "{out}");
}
