//! `summary.md` assembly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::commands::{
    OracleDoc, SelectionDoc, COVERAGE_TABLE, ORACLE_JSON, SELECTION_JSON, STANDALONE_CSV,
    SUMMARY_MD,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};

pub const COVERAGE_HEADER: [&str; 3] = ["K", "coverage_ge1_pct", "coverage_ge2_pct"];
pub const STANDALONE_HEADER: [&str; 5] =
    ["rank", "site_id", "name", "coverage_pct", "covered_cells"];

pub const SECTIONS: [&str; 5] = [
    "## Parameters",
    "## Coverage table",
    "## Selection order",
    "## Standalone ranking",
    "## Files",
];

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read_csv(path: &Path, header: &[&str]) -> Result<Vec<Vec<String>>> {
    let wrap = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(wrap)?;
    let found: Vec<String> = rdr
        .headers()
        .map_err(wrap)?
        .iter()
        .map(str::to_string)
        .collect();
    if found != header {
        return Err(Error::Config(format!(
            "{}: unexpected header {found:?}",
            path.display()
        )));
    }
    rdr.records()
        .map(|r| {
            r.map(|r| r.iter().map(str::to_string).collect())
                .map_err(wrap)
        })
        .collect()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn table_row(out: &mut String, cells: &[&str]) {
    out.push('|');
    for c in cells {
        let _ = write!(out, " {} |", c.replace('|', "\\|"));
    }
    out.push('\n');
}

fn table(out: &mut String, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) {
    table_row(out, header);
    table_row(out, &vec!["---"; header.len()]);
    for r in rows {
        let refs: Vec<&str> = r.iter().map(String::as_str).collect();
        table_row(out, &refs);
    }
    out.push('\n');
}

/// Builds the summary from `dir`. Fails listing every missing input when
/// the coverage, placement or standalone outputs are absent.
pub fn build_summary(config: &RunConfig, dir: &Path) -> Result<String> {
    let missing: Vec<String> = [COVERAGE_TABLE, SELECTION_JSON, STANDALONE_CSV]
        .into_iter()
        .filter(|name| !dir.join(name).is_file())
        .map(str::to_string)
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingInputs(missing));
    }
    let coverage = read_csv(&dir.join(COVERAGE_TABLE), &COVERAGE_HEADER)?;
    let selection: SelectionDoc = read_json(&dir.join(SELECTION_JSON))?;
    let standalone = read_csv(&dir.join(STANDALONE_CSV), &STANDALONE_HEADER)?;
    let oracle_path = dir.join(ORACLE_JSON);
    let oracle: Option<OracleDoc> = oracle_path
        .is_file()
        .then(|| read_json(&oracle_path))
        .transpose()?;

    let names: BTreeMap<&str, &str> = standalone
        .iter()
        .map(|r| (r[1].as_str(), r[2].as_str()))
        .collect();

    let mut s = String::from("# Gateway placement summary\n\n");
    let _ = writeln!(s, "{}\n", SECTIONS[0]);
    let _ = writeln!(
        s,
        "```json\n{}\n```\n",
        serde_json::to_string_pretty(config).expect("serializable")
    );

    let _ = writeln!(s, "{}\n", SECTIONS[1]);
    table(&mut s, &["K", ">=1 GW (%)", ">=2 GW (%)"], coverage);

    let _ = writeln!(s, "{}\n", SECTIONS[2]);
    table(
        &mut s,
        &[
            "step",
            "site_id",
            "name",
            "marginal cells",
            "cumulative coverage (%)",
        ],
        selection
            .order
            .iter()
            .zip(&selection.marginal_cells)
            .zip(&selection.fractions)
            .enumerate()
            .map(|(k, ((id, m), f))| {
                let id = id.to_string();
                let name = names.get(id.as_str()).copied().unwrap_or("").to_string();
                vec![
                    (k + 1).to_string(),
                    id,
                    name,
                    m.to_string(),
                    format!("{:.2}", 100.0 * f),
                ]
            }),
    );

    let _ = writeln!(s, "{}\n", SECTIONS[3]);
    table(
        &mut s,
        &["rank", "site_id", "name", "coverage (%)", "covered cells"],
        standalone,
    );

    if let Some(o) = oracle {
        let _ = writeln!(s, "## Exhaustive comparison\n");
        let _ = writeln!(
            s,
            "Greedy covers {} cells, the best {}-subset {:?} covers {}: ratio {:.4}.\n",
            o.greedy_cells, o.budget, o.optimal_subset, o.optimal_cells, o.ratio
        );
    }

    let _ = writeln!(s, "{}\n", SECTIONS[4]);
    let mut entries: Vec<(String, Vec<u8>)> = Vec::new();
    for e in fs::read_dir(dir).map_err(Error::io(dir))? {
        let e = e.map_err(Error::io(dir))?;
        let name = e.file_name().to_string_lossy().into_owned();
        if name == SUMMARY_MD || !e.path().is_file() {
            continue;
        }
        let bytes = fs::read(e.path()).map_err(Error::io(e.path()))?;
        entries.push((name, bytes));
    }
    entries.sort();
    table(
        &mut s,
        &["file", "bytes", "sha256"],
        entries
            .iter()
            .map(|(n, b)| vec![n.clone(), b.len().to_string(), sha256_hex(b)]),
    );
    Ok(s)
}

/// Reads the manifest table of a summary back as `(file, sha256)` pairs.
pub fn parse_manifest(summary: &str) -> Vec<(String, String)> {
    let Some(start) = summary.find(SECTIONS[4]) else {
        return Vec::new();
    };
    summary[start..]
        .lines()
        .filter(|l| l.starts_with("| ") && !l.starts_with("| file") && !l.starts_with("| ---"))
        .filter_map(|l| {
            let cols: Vec<&str> = l.trim_matches('|').split('|').map(str::trim).collect();
            (cols.len() == 3).then(|| (cols[0].to_string(), cols[2].to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_known_value() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn missing_inputs_are_named() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join(COVERAGE_TABLE),
            "K,coverage_ge1_pct,coverage_ge2_pct\n",
        )
        .unwrap();
        let cfg = RunConfig::parse(
            r#"{"scene_path": "s.json", "budget_k": 1}"#,
            Path::new("c.json"),
        )
        .unwrap();
        let err = build_summary(&cfg, dir.path()).unwrap_err();
        assert_eq!(
            err.to_string(),
            "missing input file(s): selection.json, standalone.csv"
        );
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn manifest_parse() {
        let text =
            "## Files\n\n| file | bytes | sha256 |\n| --- | --- | --- |\n| a.csv | 3 | abc |\n\n";
        assert_eq!(
            parse_manifest(text),
            vec![("a.csv".to_string(), "abc".to_string())]
        );
    }
}
