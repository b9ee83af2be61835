//! Result files.
//!
//! Every file is written to a temporary sibling and renamed into place, so a
//! crashed run leaves either the previous file or none at all.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::config::{ConfigFile, Emit};
use crate::error::{HarnessError, Result};
use crate::experiment::{ExperimentResult, FinalSamples, Quartiles, ReplicateFailure};

pub const METRICS_FILE: &str = "metrics.csv";
pub const SAMPLES_FILE: &str = "samples.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const CONFIG_FILE: &str = "config.toml";

/// Statistics of one metric's final values across replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Contents of `summary.json`. Wall-clock timings live in `timings.csv` so this
/// file is identical across re-runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub version: String,
    pub config: ConfigFile,
    pub metrics: BTreeMap<String, MetricSummary>,
    /// Final metric values, one map per successful replicate.
    pub replicates: BTreeMap<u64, BTreeMap<String, f64>>,
    pub failures: Vec<ReplicateFailure>,
}

impl Summary {
    pub fn from_result(result: &ExperimentResult) -> Self {
        let metrics = result
            .final_values()
            .into_iter()
            .map(|(name, values)| {
                let Quartiles { q1, median, q3 } = Quartiles::of(&values);
                let min = values.iter().copied().fold(f64::INFINITY, f64::min);
                let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (name, MetricSummary { median, q1, q3, min, max, count: values.len() })
            })
            .collect();
        let replicates = result
            .replicates
            .iter()
            .map(|r| {
                let last: BTreeMap<String, f64> =
                    r.trace.entries.iter().map(|e| (e.metric.clone(), e.value)).collect();
                (r.replicate, last)
            })
            .collect();
        Summary {
            version: result.version.to_string(),
            config: result.config.to_file(),
            metrics,
            replicates,
            failures: result.failures.clone(),
        }
    }
}

pub fn read_summary(path: impl AsRef<Path>) -> Result<Summary> {
    let path = path.as_ref();
    let path = if path.is_dir() { path.join(SUMMARY_FILE) } else { path.to_path_buf() };
    let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::config(format!("{}: {e}", path.display())))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| HarnessError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| HarnessError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| HarnessError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| HarnessError::io(path, e.error))?;
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| HarnessError::config(format!("CSV encoding failed: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| HarnessError::config(format!("CSV encoding failed: {e}")))
}

/// `replicate,step,metric,value`, replicates in order.
pub fn metrics_csv(result: &ExperimentResult) -> Result<Vec<u8>> {
    let rows = result.replicates.iter().flat_map(|r| {
        r.trace
            .entries
            .iter()
            .map(move |e| vec![r.replicate.to_string(), e.step.to_string(), e.metric.clone(), e.value.to_string()])
    });
    csv_bytes(&["replicate", "step", "metric", "value"], rows)
}

/// Continuous: `replicate,weight,x1..xd`. Discrete: `replicate,index,count,weight`.
pub fn samples_csv(result: &ExperimentResult) -> Result<Vec<u8>> {
    let dim = result.config.model.dimension();
    if result.config.model.is_discrete() {
        let rows = result.replicates.iter().flat_map(|r| match &r.samples {
            FinalSamples::Discrete(rows) => rows
                .iter()
                .map(|s| vec![r.replicate.to_string(), s.key.clone(), s.count.to_string(), s.weight.to_string()])
                .collect(),
            FinalSamples::Continuous { .. } => Vec::new(),
        });
        csv_bytes(&["replicate", "index", "count", "weight"], rows)
    } else {
        let coords: Vec<String> = (1..=dim).map(|k| format!("x{k}")).collect();
        let mut header = vec!["replicate", "weight"];
        header.extend(coords.iter().map(String::as_str));
        let rows = result.replicates.iter().flat_map(|r| match &r.samples {
            FinalSamples::Continuous { points, weights } => points
                .iter()
                .zip(weights)
                .map(|(x, w)| {
                    let mut row = vec![r.replicate.to_string(), w.to_string()];
                    row.extend(x.iter().map(f64::to_string));
                    row
                })
                .collect(),
            FinalSamples::Discrete(_) => Vec::new(),
        });
        csv_bytes(&header, rows)
    }
}

/// `replicate,seconds`, plus a `total` row.
pub fn timings_csv(result: &ExperimentResult) -> Result<Vec<u8>> {
    let rows = result
        .replicates
        .iter()
        .map(|r| vec![r.replicate.to_string(), r.elapsed.to_string()])
        .chain(std::iter::once(vec!["total".to_string(), result.elapsed.to_string()]));
    csv_bytes(&["replicate", "seconds"], rows)
}

pub fn summary_json(result: &ExperimentResult) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(&Summary::from_result(result))
        .map_err(|e| HarnessError::config(format!("summary encoding failed: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes the files listed in the config's emit list into `dir`, creating it
/// if needed. Returns the paths written.
pub fn emit_results(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut written = Vec::new();
    for what in &result.config.emit {
        let (name, bytes) = match what {
            Emit::Metrics => (METRICS_FILE, metrics_csv(result)?),
            Emit::Samples => (SAMPLES_FILE, samples_csv(result)?),
            Emit::Summary => (SUMMARY_FILE, summary_json(result)?),
            Emit::Timings => (TIMINGS_FILE, timings_csv(result)?),
            Emit::Config => (CONFIG_FILE, result.config.to_toml().into_bytes()),
        };
        let path = dir.join(name);
        write_atomic(&path, &bytes)?;
        written.push(path);
    }
    Ok(written)
}
