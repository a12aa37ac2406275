#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub fn stackq(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stackq"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stackq_ok(out: &Path, args: &[&str]) -> Output {
    let o = stackq(out, args);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("output exists")).expect("valid JSON")
}

/// Rows of a numeric CSV, header dropped.
pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).expect("output exists");
    let mut lines = text.lines();
    let header = lines.next().expect("header").split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().expect("number")).collect())
        .collect();
    (header, rows)
}
