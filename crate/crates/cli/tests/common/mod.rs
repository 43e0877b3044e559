#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ecodyn")
}

pub fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/scenarios")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Scenario files sorted by name.
pub fn scenarios() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(scenario_dir())
        .expect("scenario directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "scn"))
        .collect();
    v.sort();
    v
}

/// Output file name for a scenario: its stem plus the format's extension.
pub fn output_name(scenario: &Path) -> String {
    let text = std::fs::read_to_string(scenario).unwrap();
    let parsed = ecodyn::parse_scenario(&text).unwrap();
    let json = parsed.entries.iter().any(|(k, v)| k == "format" && v == "json");
    let stem = scenario.file_stem().unwrap().to_string_lossy();
    format!("{stem}.{}", if json { "json" } else { "csv" })
}

pub fn ecodyn(args: &[&str]) -> Output {
    Command::new(bin()).args(args).env_remove("ECODYN_DEFAULT_STEPS").output().expect("run ecodyn")
}

/// Runs a scenario into `dir` and returns the written bytes.
pub fn run_scenario(scenario: &Path, dir: &Path) -> Vec<u8> {
    let out = dir.join(output_name(scenario));
    let res = ecodyn(&["--scenario", scenario.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(
        res.status.success(),
        "{} failed: {}",
        scenario.display(),
        String::from_utf8_lossy(&res.stderr)
    );
    std::fs::read(out).unwrap()
}
