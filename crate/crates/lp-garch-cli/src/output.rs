//! CSV emitters and the run manifest.
//!
//! Column orders are fixed and floats are written in Rust's shortest
//! round-trip form, so identical runs produce byte-identical files.

use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use lp_garch::mc::{DiffTable, SeTable, SummaryTable};

use crate::config::FileConfig;

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file =
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(csv::Writer::from_writer(file))
}

/// `se_by_horizon.csv`: one row per (cell, model, horizon).
pub fn write_se_table(path: &Path, se: &SeTable<f64>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["beta1", "alpha2", "T", "model", "h", "se", "n_used", "n_failed"])?;
    for (cell, model, h, entry) in se.rows() {
        w.write_record([
            cell.beta1.to_string(),
            cell.alpha2.to_string(),
            cell.t_len.to_string(),
            model.name().to_string(),
            h.to_string(),
            fmt_opt(entry.se),
            entry.n_used.to_string(),
            entry.n_failed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `diff_by_horizon.csv`: standard-error differences against the benchmark.
pub fn write_diff_table(path: &Path, diff: &DiffTable<f64>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["beta1", "alpha2", "T", "model", "h", "diff"])?;
    for (cell, model, h, entry) in diff.rows() {
        w.write_record([
            cell.beta1.to_string(),
            cell.alpha2.to_string(),
            cell.t_len.to_string(),
            model.name().to_string(),
            h.to_string(),
            fmt_opt(entry.diff),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `summary.csv`: horizon-averaged differences (and ratios) per cell/model.
pub fn write_summary_table(path: &Path, summary: &SummaryTable<f64>) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["beta1", "alpha2", "T", "model", "mean_diff", "mean_ratio"])?;
    for (cell, model, entry) in summary.rows() {
        w.write_record([
            cell.beta1.to_string(),
            cell.alpha2.to_string(),
            cell.t_len.to_string(),
            model.name().to_string(),
            entry.mean_diff.to_string(),
            fmt_opt(entry.mean_ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct FailureCount {
    pub beta1: f64,
    pub alpha2: f64,
    #[serde(rename = "T")]
    pub t_len: usize,
    pub model: String,
    /// Failed (model, horizon, replication) fits summed over horizons.
    pub n_failed: u64,
}

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

/// Run manifest: effective configuration, timing, failure counts, and
/// content digests of every emitted file.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    pub config: FileConfig,
    pub failure_counts: Vec<FailureCount>,
    pub outputs: Vec<OutputDigest>,
}

pub fn failure_counts(se: &SeTable<f64>) -> Vec<FailureCount> {
    let mut out: Vec<FailureCount> = Vec::new();
    for (cell, model, _h, entry) in se.rows() {
        match out.last_mut() {
            Some(last)
                if last.beta1 == cell.beta1
                    && last.alpha2 == cell.alpha2
                    && last.t_len == cell.t_len
                    && last.model == model.name() =>
            {
                last.n_failed += u64::from(entry.n_failed);
            }
            _ => out.push(FailureCount {
                beta1: cell.beta1,
                alpha2: cell.alpha2,
                t_len: cell.t_len,
                model: model.name().to_string(),
                n_failed: u64::from(entry.n_failed),
            }),
        }
    }
    out
}

pub fn digest_file(path: &Path) -> Result<OutputDigest> {
    let bytes =
        std::fs::read(path).with_context(|| format!("cannot read back {}", path.display()))?;
    let digest = Sha256::digest(&bytes);
    Ok(OutputDigest {
        file: path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        sha256: hex::encode(digest),
    })
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    let json = serde_json::to_string_pretty(manifest)?;
    std::fs::write(path, json.as_bytes())
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Paths of the four run outputs inside `out_dir`.
pub struct OutputPaths {
    pub se: PathBuf,
    pub diff: PathBuf,
    pub summary: PathBuf,
    pub manifest: PathBuf,
}

impl OutputPaths {
    pub fn new(out_dir: &Path) -> Self {
        Self {
            se: out_dir.join("se_by_horizon.csv"),
            diff: out_dir.join("diff_by_horizon.csv"),
            summary: out_dir.join("summary.csv"),
            manifest: out_dir.join("manifest.json"),
        }
    }
}
