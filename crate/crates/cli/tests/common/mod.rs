#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    fn from(out: Output) -> Self {
        Run {
            code: out.status.code().unwrap_or(-1),
            stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
            stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
        }
    }
}

pub fn seiar(args: &[&str]) -> Run {
    Run::from(Command::new(env!("CARGO_BIN_EXE_seiar")).args(args).output().expect("binary runs"))
}

/// Run a subcommand with `--config <dir>/<name>.toml --out <dir>/<out>`.
pub fn run_in(dir: &Path, cmd: &str, config: &str, out: &str, data: Option<&Path>) -> Run {
    let cfg = dir.join(format!("{config}.toml"));
    let out = dir.join(out);
    let mut args = vec![cmd.to_string(), "--config".into(), s(&cfg), "--out".into(), s(&out)];
    if let Some(d) = data {
        args.push("--data".into());
        args.push(s(d));
    }
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    seiar(&refs)
}

pub fn s(p: &Path) -> String {
    p.to_str().expect("utf-8 path").to_string()
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Header and rows of a CSV output.
pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines();
    let header = lines.next().expect("header").split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}

pub fn column(path: &Path, name: &str) -> Vec<f64> {
    let (header, rows) = read_csv(path);
    let k = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

/// `section,key,value` lookup in stability.csv.
pub fn lookup(path: &Path, section: &str, key: &str) -> Option<String> {
    let (_, rows) = read_csv(path);
    rows.into_iter().find(|r| r[0] == section && r[1] == key).map(|r| r[2].clone())
}

pub fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}
