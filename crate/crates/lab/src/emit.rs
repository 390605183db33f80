//! CSV and JSON output, and readers for round trips.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::runner::TrialRecord;
use crate::summary::Summary;

pub const CSV_COLUMNS: [&str; 9] = [
    "grid_param",
    "trial",
    "seed",
    "l2_error",
    "residual_at_truth",
    "epsilon",
    "iterations",
    "converged",
    "wall_time_ms",
];

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    grid_param: f64,
    trial: usize,
    seed: u64,
    l2_error: f64,
    residual_at_truth: Option<f64>,
    epsilon: f64,
    iterations: usize,
    converged: bool,
    wall_time_ms: f64,
}

impl From<&TrialRecord> for CsvRow {
    fn from(r: &TrialRecord) -> Self {
        CsvRow {
            grid_param: r.grid_param,
            trial: r.trial,
            seed: r.seed,
            l2_error: r.l2_error,
            residual_at_truth: r.residual_at_truth,
            epsilon: r.epsilon,
            iterations: r.iterations,
            converged: r.converged,
            wall_time_ms: r.wall_time_ms,
        }
    }
}

impl From<CsvRow> for TrialRecord {
    fn from(r: CsvRow) -> Self {
        TrialRecord {
            grid_param: r.grid_param,
            trial: r.trial,
            seed: r.seed,
            l2_error: r.l2_error,
            residual_at_truth: r.residual_at_truth,
            epsilon: r.epsilon,
            iterations: r.iterations,
            converged: r.converged,
            wall_time_ms: r.wall_time_ms,
            failure: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub timestamp: String,
    pub config: ExperimentConfig,
    pub summary: Summary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JsonReport {
    pub metadata: Metadata,
    pub records: Vec<TrialRecord>,
}

pub fn write_csv_to<W: Write>(records: &[TrialRecord], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.serialize(CsvRow::from(r))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv_from<R: Read>(input: R) -> csv::Result<Vec<TrialRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.deserialize::<CsvRow>()
        .map(|row| row.map(TrialRecord::from))
        .collect()
}

pub fn json_report(
    records: &[TrialRecord],
    summary: &Summary,
    cfg: &ExperimentConfig,
) -> JsonReport {
    JsonReport {
        metadata: Metadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            config: cfg.clone(),
            summary: summary.clone(),
        },
        records: records.to_vec(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| LabError::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> LabError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => LabError::io(path, io),
        other => LabError::data(path, format!("{other:?}")),
    }
}

pub fn write_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    write_csv_to(records, create(path)?).map_err(|e| csv_error(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<TrialRecord>> {
    let file = File::open(path).map_err(|e| LabError::io(path, e))?;
    read_csv_from(file).map_err(|e| csv_error(path, e))
}

pub fn write_json(report: &JsonReport, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, report).map_err(|e| LabError::data(path, e))?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| LabError::io(path, e))
}

pub fn read_json(path: &Path) -> Result<JsonReport> {
    let file = File::open(path).map_err(|e| LabError::io(path, e))?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|e| LabError::data(path, e))
}
