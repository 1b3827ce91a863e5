//! CSV tables and the run manifest.

use std::collections::BTreeMap;
use std::path::Path;

use plateaulab_core::experiments::{ExperimentConfig, FitResult, ModelKind, Record, SummaryRow};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const FIT_FILE: &str = "fit.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

const RECORD_COLUMNS: [&str; 6] = ["experiment", "model", "n_v", "n_h", "instance", "seed"];

/// Provenance written next to the tables of every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub version: String,
    pub base_seed: u64,
    /// File name to lowercase hex SHA-256.
    pub checksums: BTreeMap<String, String>,
    pub duration_seconds: f64,
}

/// Shortest decimal that parses back to the same double.
pub fn fmt_float(x: f64) -> String {
    format!("{x:?}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, CliError> {
    w.into_inner()
        .map_err(|e| CliError::Runtime(format!("csv buffer: {e}")))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Runtime(format!("csv: {e}"))
}

pub fn records_csv(records: &[Record], gradient: bool) -> Result<Vec<u8>, CliError> {
    let mut w = writer();
    let value_col = if gradient { "grad_inf_norm" } else { "value" };
    let mut header = RECORD_COLUMNS.to_vec();
    header.push(value_col);
    w.write_record(&header).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.experiment.to_string(),
            r.model.to_string(),
            r.n_v.to_string(),
            r.n_h.to_string(),
            r.instance.to_string(),
            r.seed.to_string(),
            fmt_float(r.value),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn summary_csv(rows: &[SummaryRow]) -> Result<Vec<u8>, CliError> {
    let mut w = writer();
    w.write_record([
        "model",
        "n_h",
        "count",
        "mean",
        "variance",
        "hist_peak",
        "bound",
    ])
    .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.model.to_string(),
            r.n_h.to_string(),
            r.count.to_string(),
            fmt_float(r.mean),
            fmt_float(r.variance),
            fmt_float(r.hist_peak),
            fmt_float(r.bound),
        ])
        .map_err(csv_err)?;
    }
    finish(w)
}

pub fn fit_csv(model: ModelKind, fit: &FitResult) -> Result<Vec<u8>, CliError> {
    let mut w = writer();
    w.write_record(["model", "slope", "intercept", "r_squared"])
        .map_err(csv_err)?;
    w.write_record([
        model.to_string(),
        fmt_float(fit.slope),
        fmt_float(fit.intercept),
        fmt_float(fit.r_squared),
    ])
    .map_err(csv_err)?;
    finish(w)
}

fn field<T: std::str::FromStr>(
    row: &csv::StringRecord,
    i: usize,
    line: usize,
) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    let raw = row
        .get(i)
        .ok_or_else(|| CliError::Runtime(format!("row {line}: missing column {i}")))?;
    raw.parse()
        .map_err(|e| CliError::Runtime(format!("row {line}, column {i} ({raw:?}): {e}")))
}

/// Parses a `records.csv` written by [`records_csv`].
pub fn read_records(path: &Path) -> Result<Vec<Record>, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = reader.headers().map_err(csv_err)?.clone();
    let expected: Vec<&str> = RECORD_COLUMNS.to_vec();
    if header.len() != 7 || header.iter().take(6).ne(expected.iter().copied()) {
        return Err(CliError::Runtime(format!(
            "unexpected records header {header:?}"
        )));
    }
    reader
        .records()
        .enumerate()
        .map(|(line, row)| {
            let row = row.map_err(csv_err)?;
            Ok(Record {
                experiment: field(&row, 0, line)?,
                model: field(&row, 1, line)?,
                n_v: field(&row, 2, line)?,
                n_h: field(&row, 3, line)?,
                instance: field(&row, 4, line)?,
                seed: field(&row, 5, line)?,
                value: field(&row, 6, line)?,
            })
        })
        .collect()
}

/// Loads `manifest.json` from `dir` and checks every listed file against its checksum.
pub fn verify_manifest(dir: &Path) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))
        .map_err(|e| CliError::Runtime(format!("reading manifest: {e}")))?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Runtime(format!("parsing manifest: {e}")))?;
    for (name, sum) in &manifest.checksums {
        let bytes = std::fs::read(dir.join(name))
            .map_err(|e| CliError::Runtime(format!("reading {name}: {e}")))?;
        let actual = sha256_hex(&bytes);
        if &actual != sum {
            return Err(CliError::Runtime(format!(
                "checksum mismatch for {name}: {actual} != {sum}"
            )));
        }
    }
    Ok(manifest)
}
