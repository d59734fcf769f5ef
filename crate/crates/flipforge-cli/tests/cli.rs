use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flipforge")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn generate(dir: &Path, name: &str, kind: &str, size: usize, seed: u64) -> PathBuf {
    let out = stdout(&run(&["gen", kind, "--size", &size.to_string(), "--seed", &seed.to_string()]));
    write(dir, name, &out)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_is_deterministic() {
    let a = stdout(&run(&["gen", "convex", "--size", "12", "--seed", "4"]));
    let b = stdout(&run(&["gen", "convex", "--size", "12", "--seed", "4"]));
    assert_eq!(a, b);
    let c = stdout(&run(&["gen", "convex", "--size", "12", "--seed", "5"]));
    assert_ne!(a, c);
}

#[test]
fn transform_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(dir.path(), "a.json", "convex", 20, 1);
    let b = generate(dir.path(), "b.json", "convex", 20, 2);
    for algo in ["sequential", "simultaneous", "approx"] {
        let out: Value = serde_json::from_str(&stdout(&run(&["transform", s(&a), s(&b), "--algo", algo]))).unwrap();
        assert_eq!(out["verified"], true);
        let seq = write(dir.path(), &format!("{algo}.json"), &out["sequence"].to_string());
        let v = run(&["verify", s(&a), s(&seq), s(&b)]);
        assert_eq!(stdout(&v).trim(), "ok", "{algo}");
        // Swapping the endpoints must fail verification with exit code 1.
        if out["cost"].as_u64().unwrap() > 0 {
            assert_eq!(run(&["verify", s(&b), s(&seq), s(&b)]).status.code(), Some(1));
        }
    }
}

#[test]
fn pentagon_distances() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", r#"{"m":5,"diagonals":[[0,2],[0,3]],"labels":[2,1]}"#);
    let b = write(dir.path(), "b.json", r#"{"m":5,"diagonals":[[0,2],[0,3]],"labels":[1,2]}"#);
    let exact: Value = serde_json::from_str(&stdout(&run(&["distance", s(&a), s(&b), "--exact"]))).unwrap();
    assert_eq!(exact["distance"], 5);
    let approx: Value = serde_json::from_str(&stdout(&run(&["distance", s(&a), s(&b), "--approx"]))).unwrap();
    assert_eq!((approx["lower"].as_u64(), approx["upper"].as_u64()), (Some(2), Some(5)));
}

#[test]
fn comb_transform() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(dir.path(), "a.json", "comb", 10, 1);
    let b = generate(dir.path(), "b.json", "comb", 10, 2);
    let out: Value = serde_json::from_str(&stdout(&run(&["transform", s(&a), s(&b)]))).unwrap();
    assert_eq!(out["up_to_isomorphism"], true);
}

#[test]
fn bench_csv() {
    let out = stdout(&run(&["bench", "--suite", "sortmodels", "--sizes", "8,16", "--seeds", "2", "--no-timing"]));
    let mut rows = csv::Reader::from_reader(out.as_bytes());
    assert_eq!(rows.headers().unwrap(), vec!["algo", "n", "seed", "cost", "wall_micros"]);
    let rows: Vec<_> = rows.records().map(Result::unwrap).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[3].parse::<i64>().unwrap() >= 0));
    let again = stdout(&run(&["bench", "--suite", "sortmodels", "--sizes", "8,16", "--seeds", "2", "--no-timing"]));
    assert_eq!(out, again);
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let junk = write(dir.path(), "junk.json", "{\"nope\": 1}");
    assert_eq!(run(&["transform", s(&junk), s(&junk)]).status.code(), Some(2));
    assert_eq!(run(&["gen", "redblue", "--size", "0"]).status.code(), Some(2));
}
