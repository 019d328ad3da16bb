//! Report, trace and manifest files.
//!
//! Every file is written to a temporary sibling and renamed into place, so a
//! reader never sees a partial report.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::LabError;
use crate::report::{FieldTrace, ScenarioReport};

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), LabError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| LabError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| LabError::io(path, e))?;
    tmp.persist(path).map_err(|e| LabError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), LabError> {
    let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn trace_bytes(trace: &FieldTrace) -> Result<Vec<u8>, csv::Error> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    wtr.write_record(FieldTrace::HEADER)?;
    for row in &trace.rows {
        wtr.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    wtr.into_inner().map_err(|e| e.into_error().into())
}

/// Writes `<scenario>.json` and one `<scenario>.<label>.csv` per trace.
/// Returns the paths written.
pub fn write_report(root: &Path, report: &ScenarioReport) -> Result<Vec<PathBuf>, LabError> {
    let json_path = root.join(format!("{}.json", report.scenario));
    write_json(&json_path, report)?;
    let mut written = vec![json_path];
    for trace in &report.traces {
        let path = root.join(format!("{}.{}.csv", report.scenario, trace.label));
        let bytes = trace_bytes(trace).map_err(|e| LabError::io(&path, std::io::Error::other(e)))?;
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Serialize)]
pub struct ManifestEntry {
    pub scenario: String,
    pub passed: bool,
    pub residuals: Vec<(String, f64)>,
    pub files: Vec<String>,
}

/// Run summary; the only output that carries timestamps.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub config: ExperimentConfig,
    pub scenarios: Vec<ManifestEntry>,
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl RunManifest {
    pub fn new(command: &str, config: &ExperimentConfig, started_unix: u64) -> Self {
        Self {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            started_unix,
            finished_unix: started_unix,
            config: config.clone(),
            scenarios: vec![],
        }
    }

    pub fn record(&mut self, report: &ScenarioReport, files: &[PathBuf]) {
        self.scenarios.push(ManifestEntry {
            scenario: report.scenario.clone(),
            passed: report.passed,
            residuals: report.metrics.iter().map(|m| (m.name.clone(), m.value)).collect(),
            files: files
                .iter()
                .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default())
                .collect(),
        });
    }

    pub fn write(mut self, root: &Path) -> Result<PathBuf, LabError> {
        self.finished_unix = unix_now();
        let path = root.join("manifest.json");
        write_json(&path, &self)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_csv_has_fixed_header() {
        let trace = FieldTrace {
            label: "x".into(),
            rows: vec![[1.0, 0.5, 0.25, -1.0, 0.0, 2.0]],
        };
        let text = String::from_utf8(trace_bytes(&trace).unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x,re_u1,im_u1,re_u2,im_u2"));
        assert_eq!(lines.next(), Some("1e0,5e-1,2.5e-1,-1e0,0e0,2e0"));
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("a.json");
        write_json(&path, &vec![1, 2]).unwrap();
        write_json(&path, &vec![3]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.trim(), "[\n  3\n]");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
