use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn nanomu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nanomu")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let o = nanomu(&all);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn borromean_triple_invariant() {
    let o = nanomu(&["compute", "examples:borromean", "--indices", "2,3,1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "mu=-1 delta=0 mubar=-1 (mod 0) q_used=3\n");
    let v = json(&["compute", "examples:borromean", "--indices", "2,3,1"]);
    assert_eq!(
        v,
        serde_json::json!({"sequence":[2,3,1],"mu":-1,"delta":0,"mubar":{"value":-1,"modulus":0},"q_used":3})
    );
}

#[test]
fn four_component_example() {
    let v = json(&["compute", "examples:ex4", "--indices", "1,2,4,3"]);
    assert_eq!(v["mu"], 0);
    assert_eq!(v["delta"], 1);
    assert_eq!(v["mubar"]["value"], 0);
}

#[test]
fn empty_phrase_from_stdin() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_nanomu"))
        .args(["compute", "-", "--indices", "1,2"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"letters:\nphrase: . | .\n").unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("mu=0 delta=0 mubar=0 (mod 0)"));
}

#[test]
fn repeated_indices_warn() {
    let o = nanomu(&["compute", "examples:borromean", "--indices", "1,1,2"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn expand_component_three_of_ex32() {
    let v = json(&["expand", "examples:ex32", "-i", "3", "-q", "3"]);
    assert_eq!(v["rho"], "C^-1 D^-1 C E^-1");
}

#[test]
fn examples_listing_and_torus() {
    let o = nanomu(&["examples"]);
    assert!(stdout(&o).lines().any(|l| l == "borromean"));
    let v = json(&["examples", "torus:1"]);
    assert_eq!(v["name"], "torus:1");
    assert_eq!(nanomu(&["examples", "nothing"]).status.code(), Some(1));
}

#[test]
fn zero_step_walk_is_identity() {
    let start = json(&["examples", "ex32"]);
    let v = json(&["moves", "walk", "examples:ex32", "--steps", "0"]);
    assert_eq!(v["trace"]["steps"].as_array().unwrap().len(), 0);
    assert_eq!(v["phrase"], start["phrase"]);
}

#[test]
fn walks_are_reproducible() {
    let a = json(&["--seed", "9", "moves", "walk", "examples:ex4", "--steps", "15"]);
    let b = json(&["--seed", "9", "moves", "walk", "examples:ex4", "--steps", "15"]);
    assert_eq!(a, b);
}

#[test]
fn apply_listed_site() {
    let sites = json(&["moves", "list", "examples:ex32", "--kinds", "H1_remove"]);
    assert_eq!(sites.as_array().unwrap().len(), 1);
    let o = nanomu(&["moves", "apply", "examples:ex32", "--kinds", "H1_remove", "--site", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("phrase: A B | C D B | D E A | C E"));
    let o = nanomu(&["moves", "apply", "examples:ex32", "--site", "999"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn small_fuzz_passes_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cx");
    let o = nanomu(&[
        "fuzz", "--variant", "welded_M", "--trials", "4", "--steps", "4", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 violations"));
    assert!(!out.exists());
}

#[test]
fn phrase_files_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.nano");
    fs::write(&good, "letters: A:a+ B:b-\nphrase: A B | B A\n").unwrap();
    let o = nanomu(&["validate", good.to_str().unwrap()]);
    assert!(o.status.success());
    // Gauss failures are parse errors; projection failures are reported violations.
    let unpaired = dir.path().join("unpaired.nano");
    fs::write(&unpaired, "letters: A:a+\nphrase: A | .\n").unwrap();
    let o = nanomu(&["--json", "validate", unpaired.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["error"]["message"].as_str().unwrap().contains("exactly twice"));
    let foreign = dir.path().join("foreign.nano");
    fs::write(&foreign, "letters: A:a+ B:q\nphrase: A A | B B\n").unwrap();
    let o = nanomu(&["--json", "validate", foreign.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["valid"], false);
    assert_eq!(v["violations"][0]["letter"], "B");
}

#[test]
fn exit_codes() {
    assert_eq!(nanomu(&["compute", "examples:ex4", "--indices", "1,9"]).status.code(), Some(1));
    assert_eq!(nanomu(&["compute", "examples:ex4"]).status.code(), Some(2));
    assert_eq!(nanomu(&["frobnicate"]).status.code(), Some(2));
    let o = nanomu(&["--json", "compute", "examples:ex4", "--indices", "1,9"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["error"]["message"].is_string());
}
