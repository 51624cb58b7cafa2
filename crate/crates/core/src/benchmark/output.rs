//! CSV and JSON result files. All outputs are UTF-8 with `\n` line endings.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::aggregate::AggregateResult;
use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::regret::RegretRecord;

pub const RESULT_COLUMNS: [&str; 10] = [
    "function",
    "policy",
    "noise",
    "resolution",
    "horizon",
    "checkpoint",
    "replications",
    "mean_regret",
    "stderr",
    "seed",
];

/// One line of the long-format results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub function: String,
    pub policy: String,
    pub noise: f64,
    pub resolution: usize,
    pub horizon: usize,
    pub checkpoint: usize,
    pub replications: usize,
    pub mean_regret: f64,
    pub stderr: f64,
    pub seed: u64,
}

/// One row per checkpoint of `result`.
pub fn result_rows(cfg: &ExperimentConfig, result: &AggregateResult) -> Vec<ResultRow> {
    result
        .checkpoints
        .iter()
        .map(|c| ResultRow {
            function: cfg.function.id().to_string(),
            policy: cfg.policy.name().to_string(),
            noise: cfg.noise,
            resolution: cfg.resolution,
            horizon: cfg.horizon,
            checkpoint: c.checkpoint,
            replications: result.replications,
            mean_regret: c.mean,
            stderr: c.stderr,
            seed: cfg.seed,
        })
        .collect()
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format {
            path: path.into(),
            message: format!("{other:?}"),
        },
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(create(path)?))
}

/// Long-format results; an empty slice yields a header-only file.
pub fn write_results_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(RESULT_COLUMNS).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(RESULT_COLUMNS) {
        return Err(Error::Format {
            path: path.into(),
            message: format!("unexpected header {:?}", header),
        });
    }
    r.deserialize()
        .collect::<std::result::Result<Vec<ResultRow>, _>>()
        .map_err(|e| csv_error(path, e))
}

/// Per-step traces for regret-over-time plots.
pub fn write_traces_csv(path: &Path, records: &[RegretRecord]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "replication",
        "step",
        "node",
        "instantaneous_regret",
        "cumulative_regret",
    ])
    .map_err(|e| csv_error(path, e))?;
    for r in records {
        for step in 0..r.len() {
            w.serialize((
                r.replication,
                step + 1,
                r.chosen[step],
                r.instantaneous[step],
                r.cumulative[step],
            ))
            .map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Wide table: one row per label, one column per header entry.
pub fn write_table_csv(path: &Path, header: &[String], rows: &[(String, Vec<f64>)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for (label, values) in rows {
        let mut fields = vec![label.clone()];
        fields.extend(values.iter().map(|v| v.to_string()));
        w.write_record(&fields).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Pretty-printed JSON followed by a newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Format {
        path: path.into(),
        message: e.to_string(),
    })?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryEntry<'a> {
    pub config: &'a ExperimentConfig,
    pub result: &'a AggregateResult,
}
