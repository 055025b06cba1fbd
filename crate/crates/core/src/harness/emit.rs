//! CSV and JSON output.
//!
//! CSV files always start with a header, even when there are no rows; absent
//! values are empty cells. Floats are written in shortest round-trip form, so
//! reading a file back gives the same values.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{ComparisonRow, SummaryRow, SummaryStats, TrialRecord};
use crate::error::{Error, Result};

/// Output format of [`emit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Flat row types with a fixed CSV header.
pub trait Columns: Serialize {
    const COLUMNS: &'static [&'static str];
}

impl Columns for TrialRecord {
    const COLUMNS: &'static [&'static str] = &[
        "n",
        "p",
        "seed",
        "connected",
        "stretch",
        "pair_i",
        "pair_j",
        "runtime_ms",
        "generator",
        "conditioning_ok",
        "nice_disc_count",
    ];
}

impl Columns for SummaryRow {
    const COLUMNS: &'static [&'static str] = &[
        "n",
        "p",
        "lambda",
        "trials",
        "count",
        "conditioning_failures",
        "connected_count",
        "p_gt_lambda",
        "se_gt_lambda",
        "p_gt_lambda_con",
        "se_gt_lambda_con",
        "p_lt_lambda",
        "se_lt_lambda",
        "p_gt_2lambda_plus_1",
        "se_gt_2lambda_plus_1",
        "w",
        "thm1_threshold",
        "p_gt_thm1",
        "se_gt_thm1",
        "thm2_aas_bound",
        "p_le_thm2",
        "q10_con",
        "q50_con",
        "q90_con",
        "mean_con",
        "se_mean_con",
        "se_median_con",
    ];
}

impl Columns for ComparisonRow {
    const COLUMNS: &'static [&'static str] = &[
        "n",
        "p",
        "lambda",
        "count",
        "lemma5_bound",
        "lemma5_tolerance",
        "p_gt_2lambda_plus_1",
        "lemma5_violation",
        "thm1_threshold",
        "p_gt_thm1",
        "thm2_aas_bound",
        "thm2_aas_precondition",
        "p_le_thm2",
        "thm2_expectation_bound",
        "thm2_expectation_precondition",
        "mean_con",
        "thm2_expectation_gap",
        "lemma4_c",
        "lemma4_bound",
        "p_lt_lambda",
        "lemma4_gap",
    ];
}

/// Writes rows as CSV or as a JSON array.
pub fn emit<T: Columns>(rows: &[T], format: Format, path: &Path) -> Result<()> {
    match format {
        Format::Csv => write_csv(rows, path),
        Format::Json => write_json(&rows, path),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::Internal(format!("CSV output to {}: {kind:?}", path.display())),
    }
}

pub fn write_csv<T: Columns>(rows: &[T], path: &Path) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(create(path)?);
    w.write_record(T::COLUMNS).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_records_json(path: &Path) -> Result<Vec<TrialRecord>> {
    read_json(path)
}

pub fn read_summary_json(path: &Path) -> Result<SummaryStats> {
    read_json(path)
}

pub fn read_records_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != TrialRecord::COLUMNS {
        return Err(Error::invalid(format!(
            "{}: unexpected record header {header:?}",
            path.display()
        )));
    }
    Ok(r.deserialize().collect::<Result<Vec<TrialRecord>, _>>()?)
}
