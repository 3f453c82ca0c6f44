//! Run configuration, report and manifest files, and experiment dispatch.

mod config;
mod report;
mod run;

pub use config::{load_config, Experiment, NormMethod, RunConfig, DEFAULT_OUTPUT_DIR};
pub use report::{emit_report, emit_tables, line_plot_svg, read_report, write_csv};
pub use run::{run_experiment, sweep_cells, CANCELLATION_TOL, CONSERVATION_TOL, CUBIC_TOL, FIT_TOL};

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::experiments::{ExperimentReport, REPORT_SCHEMA};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "BOLAB_OUTPUT_DIR";
pub const MANIFEST_SCHEMA: &str = "bolab-manifest/1";

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub experiment: String,
    /// SHA-256 of the canonical config text.
    pub config_sha256: String,
    pub config: String,
    pub seeds: Vec<u64>,
    pub crate_version: String,
    pub report_schema: String,
    pub threads: usize,
    pub files: Vec<String>,
    pub wall_clock_s: f64,
}

pub fn config_hash(cfg: &RunConfig) -> String {
    let digest = Sha256::digest(cfg.emit().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn manifest(cfg: &RunConfig, report: &ExperimentReport, files: &[PathBuf]) -> Manifest {
    Manifest {
        schema: MANIFEST_SCHEMA.into(),
        experiment: cfg.experiment.name().into(),
        config_sha256: config_hash(cfg),
        config: cfg.emit(),
        seeds: vec![cfg.seed],
        crate_version: env!("CARGO_PKG_VERSION").into(),
        report_schema: REPORT_SCHEMA.into(),
        threads: rayon::current_num_threads(),
        files: files.iter().map(|p| p.display().to_string()).collect(),
        wall_clock_s: report.wall_clock_s,
    }
}

pub fn write_manifest(dir: &Path, m: &Manifest) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(m)?)?;
    Ok(path)
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: ExperimentReport,
    /// Report files followed by the manifest.
    pub files: Vec<PathBuf>,
}

/// Validate, run, and write the report, the config and the manifest to `cfg.output_dir`.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome> {
    let report = run_experiment(cfg)?;
    let dir = &cfg.output_dir;
    let mut files = emit_report(&report, dir)?;
    let cfg_path = dir.join(format!("{}.conf", cfg.experiment.name()));
    fs::write(&cfg_path, cfg.emit())?;
    files.push(cfg_path);
    let m = manifest(cfg, &report, &files);
    files.push(write_manifest(dir, &m)?);
    Ok(RunOutcome { report, files })
}
