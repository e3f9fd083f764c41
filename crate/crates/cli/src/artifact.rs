//! Artifact serialization with atomic writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::CliError;
use crate::run::{effective_seed, Outcome, Overrides, PlotSeries, Report, Table};

#[derive(Serialize)]
struct Artifact<'a> {
    name: &'a str,
    kind: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    description: Option<&'a str>,
    seed: Option<u64>,
    truncated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'a Report>,
    plot: &'a [PlotSeries],
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn csv_bytes(table: &Table) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(&table.headers)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
}

fn json_bytes(a: &Artifact) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(a).expect("artifact serializes");
    out.push(b'\n');
    out
}

/// Writes the report and table of a finished scenario; returns the paths.
pub fn write_outcome(dir: &Path, cfg: &ScenarioConfig, ov: &Overrides, out: &Outcome) -> Result<Vec<PathBuf>, CliError> {
    let a = Artifact {
        name: &cfg.name,
        kind: cfg.scenario.kind(),
        description: cfg.description.as_deref(),
        seed: effective_seed(cfg, ov),
        truncated: out.truncated,
        error: None,
        report: Some(&out.report),
        plot: &out.plot,
    };
    let json = dir.join(format!("{}.json", cfg.name));
    let csv = dir.join(format!("{}.csv", cfg.name));
    write_atomic(&json, &json_bytes(&a))?;
    write_atomic(&csv, &csv_bytes(&out.table)?)?;
    Ok(vec![json, csv])
}

/// Writes a flagged partial artifact for a scenario stopped by a state cap.
pub fn write_truncated(dir: &Path, cfg: &ScenarioConfig, ov: &Overrides, err: &nilgrowth::Error) -> Result<PathBuf, CliError> {
    let a = Artifact {
        name: &cfg.name,
        kind: cfg.scenario.kind(),
        description: cfg.description.as_deref(),
        seed: effective_seed(cfg, ov),
        truncated: true,
        error: Some(err.to_string()),
        report: None,
        plot: &[],
    };
    let json = dir.join(format!("{}.json", cfg.name));
    write_atomic(&json, &json_bytes(&a))?;
    Ok(json)
}
