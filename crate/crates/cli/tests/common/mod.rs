#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub const HAND_OLS: &str = "x,y\n0,0\n1,1\n2,3\n";

pub fn leakage(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leakage"))
        .args(args)
        .output()
        .expect("run leakage binary")
}

pub fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

pub fn schema_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"))
}

/// Panics with every violation when `doc` does not match the named schema.
pub fn assert_valid(name: &str, doc: &Value) {
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path(name)).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{name} schema violations: {errors:#?}");
}

pub fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

/// Parses a curve CSV into its header and numeric columns; the trailing
/// `marker` column is returned separately.
pub fn read_curves(text: &str) -> (Vec<String>, Vec<Vec<f64>>, Vec<String>) {
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let numeric = header.len() - 1;
    let mut cols = vec![Vec::new(); numeric];
    let mut markers = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        for (c, f) in cols.iter_mut().zip(&fields[..numeric]) {
            c.push(f.parse::<f64>().unwrap());
        }
        markers.push(fields[numeric].to_owned());
    }
    (header, cols, markers)
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(a, b)| 0.5 * (b[0] + b[1]) * (a[1] - a[0])).sum()
}
