//! CSV and manifest emission.
//!
//! Every artifact is a pure function of its inputs: numbers are written
//! with 17 significant digits, files are listed in emission order and the
//! manifest carries no timestamps or machine details.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{io_at, Result};
use crate::harness::{CheckPath, VerificationReport};

pub const CSV_HEADER: [&str; 7] = ["case", "inputs", "lhs", "rhs", "std_error", "margin", "pass"];

/// Scientific notation with 17 significant digits; `inf`/`-inf`/`nan` verbatim.
pub fn format_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn csv_bytes(report: &VerificationReport) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in &report.records {
        w.write_record([
            r.case.to_string(),
            r.inputs.clone(),
            format_number(r.lhs),
            format_number(r.rhs),
            r.std_error.map(format_number).unwrap_or_default(),
            format_number(r.margin),
            r.pass.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| crate::error::Error::Io { path: "<csv buffer>".into(), source: e.into_error() })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub experiment: String,
    pub path: CheckPath,
    pub file: String,
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub curvlab: String,
    pub curvlab_core: String,
}

impl Default for Versions {
    fn default() -> Self {
        Self { curvlab: env!("CARGO_PKG_VERSION").into(), curvlab_core: curvlab_core::VERSION.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub seed: u64,
    pub versions: Versions,
    pub config: serde_json::Value,
    pub reports: Vec<ReportSummary>,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(|r| r.failed == 0)
    }
}

/// Extra JSON document written next to the CSVs (bound records, curves).
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub body: serde_json::Value,
}

/// Output file stem for an experiment: `<experiment>_seed<seed>`.
pub fn stem(experiment: &str, seed: u64) -> String {
    let clean: String = experiment
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect();
    format!("{clean}_seed{seed}")
}

fn write(dir: &Path, name: &str, bytes: &[u8], files: &mut Vec<FileEntry>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(io_at(&path))?;
    files.push(FileEntry { file: name.into(), sha256: sha256_hex(bytes), bytes: bytes.len() });
    Ok(())
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Writes one CSV per report and one JSON per artifact under `out_dir`,
/// then `manifest_seed<seed>.json` listing them. Returns the manifest and
/// its path.
pub fn emit_results(
    command: &str,
    reports: &[VerificationReport],
    artifacts: &[Artifact],
    config: &serde_json::Value,
    seed: u64,
    out_dir: &Path,
) -> Result<(Manifest, PathBuf)> {
    fs::create_dir_all(out_dir).map_err(io_at(out_dir))?;
    let mut files = Vec::new();
    let mut summaries = Vec::new();
    for report in reports {
        let name = format!("{}.csv", stem(&report.experiment, seed));
        write(out_dir, &name, &csv_bytes(report)?, &mut files)?;
        summaries.push(ReportSummary {
            experiment: report.experiment.clone(),
            path: report.path,
            file: name,
            cases: report.records.len(),
            passed: report.passed,
            failed: report.failed,
        });
    }
    for a in artifacts {
        let name = format!("{}.json", stem(&a.name, seed));
        write(out_dir, &name, &json_bytes(&a.body)?, &mut files)?;
    }
    let manifest = Manifest {
        command: command.into(),
        seed,
        versions: Versions::default(),
        config: config.clone(),
        reports: summaries,
        files,
    };
    let path = out_dir.join(format!("manifest_seed{seed}.json"));
    fs::write(&path, json_bytes(&manifest)?).map_err(io_at(&path))?;
    Ok((manifest, path))
}
