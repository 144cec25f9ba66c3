use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqiasign"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn setup(dir: &Path) {
    for args in [
        &["params", "--out", "params.json"][..],
        &["--params", "params.json", "keygen", "--seed", "1", "--out", "kp.json", "--pk-out", "pk.json"],
        &["--params", "params.json", "genr", "--seed", "2", "--out", "w.json", "--statement-out", "s.json"],
        &["--params", "params.json", "presign", "kp.json", "s.json", "--message", "m", "--seed", "3", "--out", "pre.json"],
    ] {
        assert_eq!(code(&run(dir, args)), 0, "{args:?}");
    }
}

#[test]
fn stdout_is_canonical_json_with_newline() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["keygen", "--seed", "4"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.ends_with("}\n"));
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::to_string(&v).unwrap() + "\n", text);
}

#[test]
fn verdicts_use_exit_code_one() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    let other = run(dir.path(), &["--params", "params.json", "keygen", "--seed", "9", "--out", "kp2.json"]);
    assert_eq!(code(&other), 0);
    let o = run(dir.path(), &["--params", "params.json", "preverify", "kp2.json", "s.json", "pre.json", "--message", "m"]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["valid"], false);
    assert!(v["failed"].as_str().unwrap().starts_with("check"));

    let o = run(dir.path(), &["--params", "params.json", "--strict", "preverify", "pk.json", "s.json", "pre.json", "--message", "m"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn malformed_inputs_use_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    setup(dir.path());
    std::fs::write(dir.path().join("trunc.json"), &std::fs::read(dir.path().join("pre.json")).unwrap()[..50]).unwrap();
    let o = run(dir.path(), &["--params", "params.json", "adapt", "trunc.json", "w.json"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse error"));

    let mut v: Value = serde_json::from_slice(&std::fs::read(dir.path().join("pre.json")).unwrap()).unwrap();
    v["epsi"]["b"]["c0"] = Value::String("1".into());
    std::fs::write(dir.path().join("bad.json"), serde_json::to_string(&v).unwrap()).unwrap();
    let o = run(dir.path(), &["--params", "params.json", "adapt", "bad.json", "w.json"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("invariant violation at $."));

    let o = run(dir.path(), &["--profile", "T9", "params"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn custom_profile_and_params_file_agree() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run(dir.path(), &["--profile", "custom", "--a-exp", "9", "--primes", "5,7", "--c-exp", "3", "params", "--out", "c.json"]);
    assert_eq!(code(&gen), 0);
    let reread = run(dir.path(), &["--params", "c.json", "params"]);
    assert_eq!(code(&reread), 0);
    assert_eq!(reread.stdout, std::fs::read(dir.path().join("c.json")).unwrap());
}
