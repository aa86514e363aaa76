use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tempfile::TempDir;

fn trifree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trifree"))
        .args(args)
        .env_remove("TRIFREE_SEED")
        .output()
        .unwrap()
}

fn trifree_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_trifree"))
        .args(args)
        .env_remove("TRIFREE_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const C5: &str = "5 5\n1 2\n1 5\n2 3\n3 4\n4 5\n";
const K3: &str = "3 3\n1 2\n1 3\n2 3\n";

#[test]
fn maxcut_and_tfree_on_c5() {
    let dir = TempDir::new().unwrap();
    let c5 = write(&dir, "c5.txt", C5);
    let cut = json(&trifree(&["maxcut", "--input", &c5, "--near", "0"]));
    assert_eq!(cut["b"], 4);
    assert_eq!(cut["near_optimal"].as_array().unwrap().len(), 5);
    let t = json(&trifree(&["tfree", "--input", &c5]));
    assert_eq!(t["t"], 5);
    assert_eq!(t["optimal"], true);
    assert_eq!(t["all_k_partite"], false);
}

#[test]
fn graph_from_stdin() {
    let out = trifree_stdin(&["maxcut", "--input", "-"], K3);
    assert_eq!(json(&out)["b"], 2);
}

#[test]
fn perturb_reports_both_events() {
    let dir = TempDir::new().unwrap();
    let k3 = write(&dir, "k3.txt", K3);
    let v = json(&trifree(&[
        "perturb",
        "--input",
        &k3,
        "--partition",
        "1,2|3",
        "--add",
        "1-2",
    ]));
    assert_eq!(v["event_E"], true);
    assert_eq!(v["event_E2"], true);
    assert_eq!(v["gap"], 0);
}

#[test]
fn fkg_check_holds() {
    let v = json(&trifree(&[
        "fkg-check",
        "--n",
        "4",
        "--p",
        "0.5",
        "--partition",
        "1,2|3,4",
        "--s",
        "1-2",
        "--r0",
        "1",
        "--s0",
        "1",
    ]));
    assert_eq!(v["holds"], true);
    assert!(v["lhs"].as_f64().unwrap() <= v["rhs"].as_f64().unwrap() + 1e-12);
}

#[test]
fn bounds_formulas() {
    let v = json(&trifree(&[
        "bounds",
        "--formula",
        "trinomial",
        "--N",
        "4",
        "--alpha",
        "0.25",
        "--d",
        "0",
    ]));
    assert_eq!(v["value"], 0.1875);
    let v = json(&trifree(&[
        "bounds",
        "--formula",
        "b_bounds",
        "--n",
        "40",
        "--M",
        "200",
    ]));
    assert_eq!(v["extra"]["lower"], 100.0);
}

#[test]
fn invalid_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.txt", "3 2\n1 2\n");
    assert_eq!(trifree(&["maxcut", "--input", &bad]).status.code(), Some(2));
    assert_eq!(
        trifree(&["bounds", "--formula", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(
        trifree(&["bounds", "--formula", "s0", "--n", "-3"])
            .status
            .code(),
        Some(2)
    );
    let spec = write(
        &dir,
        "spec.json",
        r#"{"experiment":"t_equals_b","n":8,"p":0.5,"trials":0,"master_seed":1}"#,
    );
    assert_eq!(
        trifree(&["experiment", "run", "--spec", &spec])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(trifree(&["maxcut"]).status.code(), Some(2));
}

#[test]
fn solver_budget_exits_3() {
    let dir = TempDir::new().unwrap();
    let k8 = write(&dir, "k8.txt", &complete_graph_text(8));
    let out = trifree(&["tfree", "--input", &k8, "--max-nodes", "5"]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["optimal"], false);
}

fn complete_graph_text(n: usize) -> String {
    let mut s = format!("{} {}\n", n, n * (n - 1) / 2);
    for u in 1..=n {
        for v in u + 1..=n {
            s.push_str(&format!("{u} {v}\n"));
        }
    }
    s
}

#[test]
fn sample_seed_flag_and_env_agree() {
    let by_flag = trifree(&["sample", "--n", "12", "--p", "0.4", "--seed", "99"]);
    let by_env = Command::new(env!("CARGO_BIN_EXE_trifree"))
        .args(["sample", "--n", "12", "--p", "0.4"])
        .env("TRIFREE_SEED", "99")
        .output()
        .unwrap();
    assert!(by_flag.status.success());
    assert_eq!(by_flag.stdout, by_env.stdout);
    let other = trifree(&["sample", "--n", "12", "--p", "0.4", "--seed", "100"]);
    assert_ne!(by_flag.stdout, other.stdout);
}

#[test]
fn sampled_file_round_trips() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("g.txt");
    let out = trifree(&[
        "sample",
        "--n",
        "6",
        "--m",
        "9",
        "--tfree",
        "--seed",
        "3",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = json(&trifree(&["tfree", "--input", path.to_str().unwrap()]));
    assert_eq!(v["t"], 9);
    assert_eq!(v["all_k_partite"], true);
}

fn run_to(dir: &TempDir, spec: &str, name: &str, extra: &[&str]) -> Vec<u8> {
    let out_path = dir.path().join(name);
    let mut args = vec![
        "experiment",
        "run",
        "--spec",
        spec,
        "-o",
        out_path.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let out = trifree(&args);
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    fs::read(Path::new(&out_path)).unwrap()
}

#[test]
fn experiments_are_byte_identical_and_convert_to_csv() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "spec.json",
        r#"{"experiment":"t_equals_b","n":8,"p":0.6,"trials":12,"master_seed":5}"#,
    );
    let a = run_to(&dir, &spec, "a.json", &[]);
    let b = run_to(&dir, &spec, "b.json", &[]);
    assert_eq!(a, b);
    let reseeded = run_to(&dir, &spec, "c.json", &["--seed", "6"]);
    assert_ne!(a, reseeded);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 12);
    let csv = trifree_stdin(
        &["experiment", "emit", "--input", "-", "--format", "csv"],
        std::str::from_utf8(&a).unwrap(),
    );
    assert!(csv.status.success());
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert!(text.starts_with("stream_index,master_seed,status"));
    let direct = run_to(&dir, &spec, "d.csv", &["--format", "csv"]);
    assert_eq!(direct, text.as_bytes());
}

#[test]
fn flags_override_the_spec_file() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "spec.json",
        r#"{"experiment":"maxcut_uniqueness","n":8,"M":10,"trials":4,"master_seed":1}"#,
    );
    let out = run_to(
        &dir,
        &spec,
        "o.json",
        &["--trials", "3", "--n", "9", "--m", "12"],
    );
    let v: Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(v["spec"]["trials"], 3);
    assert_eq!(v["spec"]["n"], 9);
    assert!(v["records"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["m"] == 12 && r["n"] == 9));
}
