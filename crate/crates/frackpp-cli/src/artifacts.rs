//! Output artifacts: full-precision CSV files, JSON reports, and the
//! experiment manifest with file checksums.

use crate::config::Experiment;
use anyhow::{bail, Context, Result};
use frackpp_core::{
    Field, FrontTrace, GradedGrid, InvasionReport, LowerBoundReport, RateEstimate,
    SupersolutionReport,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Spreading-law constants recomputed from the configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// f'(0)/(N + 2 alpha): exponential rate for compact data
    pub c_star: f64,
    /// f'(0)/(2 alpha): exponential rate for monotone data
    pub c_star_star: f64,
    /// 2 sqrt(f'(0)): linear speed of the classical equation
    pub c_star_one: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelRate {
    pub level: f64,
    pub side: String,
    pub estimate: RateEstimate,
}

/// Everything the verification stage produced, one JSON document.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Reports {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub supersolution: Option<SupersolutionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invasion_below: Option<InvasionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invasion_above: Option<InvasionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<LowerBoundReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stretch: Option<RateEstimate>,
}

/// Manifest tying the run together: config echo, derived constants, file
/// inventory with checksums, and the acceptance summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub config: Experiment,
    pub constants: DerivedConstants,
    pub snapshot_files: Vec<String>,
    pub trace_file: String,
    pub rates_file: String,
    pub reports_file: String,
    pub files: Vec<FileEntry>,
    pub checks: Vec<CheckSummary>,
    pub overall_pass: bool,
}

pub const MANIFEST_NAME: &str = "manifest.json";

fn fmt(v: f64) -> String {
    // 17 significant digits: round-trips f64 exactly, keeps outputs
    // byte-identical across runs
    format!("{v:.16e}")
}

pub fn write_snapshot_csv(dir: &Path, index: usize, field: &Field) -> Result<String> {
    let name = format!("snapshot_{index:03}_t{:.3}.csv", field.time());
    let mut out = std::io::BufWriter::new(std::fs::File::create(dir.join(&name))?);
    writeln!(out, "x,u")?;
    for (x, u) in field.grid().nodes().iter().zip(field.values()) {
        writeln!(out, "{},{}", fmt(*x), fmt(*u))?;
    }
    Ok(name)
}

pub fn write_trace_csv(dir: &Path, traces: &[FrontTrace]) -> Result<String> {
    let name = "fronts.csv".to_string();
    let mut out = std::io::BufWriter::new(std::fs::File::create(dir.join(&name))?);
    writeln!(out, "t,lambda,x_minus,x_plus")?;
    for trace in traces {
        for ((t, xm), xp) in trace.times.iter().zip(&trace.x_minus).zip(&trace.x_plus) {
            let render = |v: &Option<f64>| v.map_or("NaN".to_string(), fmt);
            writeln!(
                out,
                "{},{},{},{}",
                fmt(*t),
                fmt(trace.level),
                render(xm),
                render(xp)
            )?;
        }
    }
    Ok(name)
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<String> {
    let body = serde_json::to_string_pretty(value)?;
    std::fs::write(dir.join(name), body)?;
    Ok(name.to_string())
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("hashing {}", path.display()))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

pub fn inventory(dir: &Path, names: &[String]) -> Result<Vec<FileEntry>> {
    let mut files = Vec::with_capacity(names.len());
    for name in names {
        files.push(FileEntry {
            path: name.clone(),
            sha256: sha256_file(&dir.join(name))?,
        });
    }
    Ok(files)
}

pub fn read_manifest(dir: &Path) -> Result<ExperimentManifest> {
    let body = std::fs::read_to_string(dir.join(MANIFEST_NAME))
        .with_context(|| format!("no manifest in {}", dir.display()))?;
    serde_json::from_str(&body).context("manifest does not parse")
}

/// Reload a snapshot written by `write_snapshot_csv` onto its grid.
pub fn read_snapshot_csv(path: &PathBuf, grid: &Arc<GradedGrid>, far: (f64, f64)) -> Result<Field> {
    let body = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read snapshot {}", path.display()))?;
    let mut values = Vec::with_capacity(grid.len());
    for (i, line) in body.lines().enumerate() {
        if i == 0 {
            if line.trim() != "x,u" {
                bail!("unexpected snapshot header {:?}", line.trim());
            }
            continue;
        }
        let mut parts = line.split(',');
        let x: f64 = parts
            .next()
            .and_then(|v| v.parse().ok())
            .with_context(|| format!("bad snapshot row {i}"))?;
        let u: f64 = parts
            .next()
            .and_then(|v| v.parse().ok())
            .with_context(|| format!("bad snapshot row {i}"))?;
        let j = values.len();
        if j >= grid.len() || x != grid.node(j) {
            bail!("snapshot node {j} does not match the configured grid");
        }
        values.push(u);
    }
    // time from the file name: snapshot_###_t{t}.csv
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default();
    let time: f64 = stem
        .rsplit("_t")
        .next()
        .and_then(|v| v.parse().ok())
        .with_context(|| format!("cannot parse time from {stem:?}"))?;
    let mut field = Field::new(grid.clone(), values, far.0, far.1, 0.0)
        .map_err(|e| anyhow::anyhow!("{e}"))?;
    field.set_time(time);
    Ok(field)
}
