use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::run::{ExperimentRecord, RunOutput, RECORD_COLUMNS};
use super::summary::{summarize, SummaryRow};
use crate::error::{Error, Result};

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{other:?}")),
    };
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Write records as CSV with the frozen header (header only when empty).
pub fn write_records_csv<W: Write>(out: W, records: &[ExperimentRecord]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn records_to_csv_string(records: &[ExperimentRecord]) -> String {
    let mut buf = Vec::new();
    write_records_csv(&mut buf, records).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn read_records_csv(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.deserialize().collect::<std::result::Result<_, _>>().map_err(|e| csv_err(path, e))
}

pub fn parse_records_csv(text: &str) -> std::result::Result<Vec<ExperimentRecord>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}

fn write_csv_rows<T: Serialize>(path: &Path, rows: &[T], header: Option<&[&str]>) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(header.is_none())
        .from_writer(BufWriter::new(file));
    if let Some(h) = header {
        w.write_record(h).map_err(|e| csv_err(path, e))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

/// Column order of the summary CSV. Frozen.
pub const SUMMARY_COLUMNS: [&str; 20] = [
    "experiment", "estimator", "grid", "grid_value", "n", "p", "s", "sigma", "reps", "errors", "mean_fp", "sd_fp",
    "mean_fn", "sd_fn", "mean_fpr", "mean_tpr", "mean_rho2", "median_rho2", "mean_l2_loss", "success_rate",
];

#[derive(Serialize)]
struct JsonReport<'a> {
    config_hash: &'a str,
    master_seed: u64,
    config: &'a super::config::ExperimentConfig,
    grid: &'a [super::run::GridUsed],
    summary: &'a [SummaryRow],
    records: &'a [ExperimentRecord],
}

/// Files written by [`emit`].
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub records: PathBuf,
    pub summary: PathBuf,
    pub json: PathBuf,
}

/// Write `<out>` (records CSV), `<stem>.summary.csv` and `<stem>.json`.
pub fn emit(output: &RunOutput, out: &Path) -> Result<Emitted> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let stem = out.with_extension("");
    let summary_path = PathBuf::from(format!("{}.summary.csv", stem.display()));
    let json_path = PathBuf::from(format!("{}.json", stem.display()));

    let file = File::create(out).map_err(io_err(out))?;
    write_records_csv(BufWriter::new(file), &output.records).map_err(|e| csv_err(out, e))?;

    let summary = summarize(&output.records);
    write_csv_rows(&summary_path, &summary, Some(&SUMMARY_COLUMNS))?;

    let report = JsonReport {
        config_hash: &output.config_hash,
        master_seed: output.config.seed,
        config: &output.config,
        grid: &output.grid,
        summary: &summary,
        records: &output.records,
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| Error::Internal(e.to_string()))?;
    std::fs::write(&json_path, text).map_err(io_err(&json_path))?;
    Ok(Emitted {
        records: out.to_path_buf(),
        summary: summary_path,
        json: json_path,
    })
}
