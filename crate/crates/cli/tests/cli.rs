use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qrwd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrwd")).args(args).output().unwrap()
}

fn payload(path: &Path) -> Value {
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v["payload"].clone()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sharded_census_merges_to_direct_census() {
    let dir = tempfile::tempdir().unwrap();
    let mut fragments: Vec<PathBuf> = Vec::new();
    for index in 0.. {
        let path = dir.path().join(format!("frag{index}.json"));
        let idx = index.to_string();
        let run = qrwd(&[
            "census",
            "--p",
            "17",
            "--t",
            "3",
            "--block-size",
            "10",
            "--shard-index",
            &idx,
            "--emit-fragment",
            s(&path),
        ]);
        if !run.status.success() {
            assert_eq!(run.status.code(), Some(2));
            assert!(String::from_utf8_lossy(&run.stderr).contains("outside"));
            break;
        }
        fragments.push(path);
    }
    assert!(fragments.len() > 1);

    let merged_dir = dir.path().join("merged");
    let mut args = vec!["census-merge", "--p", "17", "--out", s(&merged_dir)];
    args.extend(fragments.iter().rev().map(|p| s(p)));
    assert!(qrwd(&args).status.success());

    let direct_dir = dir.path().join("direct");
    assert!(qrwd(&[
        "census",
        "--p",
        "17",
        "--t",
        "3",
        "--block-size",
        "10",
        "--out",
        s(&direct_dir)
    ])
    .status
    .success());
    assert_eq!(
        payload(&merged_dir.join("census.json")),
        payload(&direct_dir.join("census.json"))
    );

    let dup: Vec<&str> = ["census-merge"]
        .into_iter()
        .chain([s(&fragments[0]), s(&fragments[0])])
        .collect();
    assert_eq!(qrwd(&dup).status.code(), Some(1));
}

#[test]
fn solve_refuses_a_census_of_another_code() {
    let dir = tempfile::tempdir().unwrap();
    assert!(qrwd(&["census", "--p", "17", "--t", "2", "--out", s(dir.path())])
        .status
        .success());
    let census = dir.path().join("census.json");
    let ok = qrwd(&["solve", "--p", "17", "--census", s(&census)]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let wrong = qrwd(&["solve", "--p", "41", "--census", s(&census)]);
    assert_eq!(wrong.status.code(), Some(1));
}

#[test]
fn solution_verifies_and_tampering_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    assert!(qrwd(&["pipeline", "--p", "41", "--t", "6", "--out", s(dir.path())])
        .status
        .success());
    let solution = dir.path().join("solution.json");
    assert!(qrwd(&["verify", "--p", "41", "--table", s(&solution)]).status.success());

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&solution).unwrap()).unwrap();
    let a = &mut v["payload"]["solution"]["a_extended"];
    let bumped = a[12].as_str().unwrap().parse::<u64>().unwrap() + 1;
    a[12] = Value::String(bumped.to_string());
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(
        qrwd(&["verify", "--p", "41", "--table", s(&tampered)]).status.code(),
        Some(1)
    );
}

#[test]
fn exit_codes() {
    assert_eq!(qrwd(&["construct", "--p", "19"]).status.code(), Some(2));
    assert_eq!(qrwd(&["pipeline", "--p", "137", "--t", "11"]).status.code(), Some(3));
    assert_eq!(
        qrwd(&["paper-regression", "--swap-top-congruence"]).status.code(),
        Some(1)
    );
    assert!(qrwd(&["construct", "--p", "17", "--format", "table"]).status.success());
    assert!(qrwd(&["group", "--p", "137"]).status.success());
}

#[test]
fn artifacts_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert!(qrwd(&["pipeline", "--p", "17", "--t", "2", "--out", s(dir.path())])
            .status
            .success());
    }
    for name in [
        "construct.json",
        "congruence.json",
        "census.json",
        "solution.json",
        "verify.json",
    ] {
        assert_eq!(payload(&a.path().join(name)), payload(&b.path().join(name)), "{name}");
    }
}
