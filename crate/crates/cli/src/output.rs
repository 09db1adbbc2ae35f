use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliResult;
use crate::runner::ExperimentResult;

pub fn csv_path(out: &str) -> PathBuf {
    PathBuf::from(format!("{out}.csv"))
}

pub fn meta_path(out: &str) -> PathBuf {
    PathBuf::from(format!("{out}.meta.json"))
}

/// CSV bytes of a result; floats carry 17 significant digits.
pub fn to_csv(result: &ExperimentResult) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&result.columns)?;
    for row in &result.rows {
        w.write_record(row.iter().map(|c| c.render()))?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn write(result: &ExperimentResult, out: &str) -> CliResult<()> {
    let csv = csv_path(out);
    if let Some(dir) = csv.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(&csv, to_csv(result)?)?;
    let meta = serde_json::to_string_pretty(&result.provenance()).expect("provenance serializes");
    fs::write(meta_path(out), meta)?;
    Ok(())
}

/// Header and raw records of a CSV written by [`write`].
pub fn read_csv(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}
