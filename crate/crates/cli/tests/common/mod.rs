#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lora_place::report::sha256_hex;

pub const SUBCOMMANDS: [&str; 4] = ["pathgain", "coverage", "place", "report"];

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn manhattan_config() -> PathBuf {
    fixtures().join("manhattan_3x3.config.json")
}

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lora-place"))
}

/// Runs one subcommand; `extra` is appended after `--config`.
pub fn run(sub: &str, config: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(sub)
        .arg("--config")
        .arg(config)
        .args(extra)
        .output()
        .expect("spawn lora-place")
}

pub fn run_ok(sub: &str, config: &Path, extra: &[&str]) -> Output {
    let out = run(sub, config, extra);
    assert!(
        out.status.success(),
        "{sub} failed: {}\n{}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// pathgain, coverage, place --oracle and report into `out_dir`.
pub fn full_pipeline(config: &Path, out_dir: &Path) {
    let out = out_dir.to_str().unwrap();
    for sub in SUBCOMMANDS {
        let mut extra = vec!["--out", out];
        if sub == "place" {
            extra.push("--oracle");
        }
        run_ok(sub, config, &extra);
    }
}

/// File name to sha256 for every regular file in `dir`.
pub fn tree_hashes(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for e in fs::read_dir(dir).unwrap() {
        let e = e.unwrap();
        if e.path().is_file() {
            let name = e.file_name().to_string_lossy().into_owned();
            out.insert(name, sha256_hex(&fs::read(e.path()).unwrap()));
        }
    }
    out
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

/// Reads a CSV with a header row into string records.
pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    let header = rdr.headers().unwrap().iter().map(str::to_string).collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect();
    (header, rows)
}
