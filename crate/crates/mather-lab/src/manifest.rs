//! The run manifest: everything needed to reproduce a run (or any single
//! row of it) plus wall-clock accounting.
//!
//! The manifest embeds the *resolved* config — defaults filled, overrides
//! applied — so `mather <subcommand> --config <manifest-extracted config>`
//! reproduces every science-bearing byte of the run. A single row is
//! reproduced the same way: the row's `instance_id` and class pin it within
//! the run, and for perturbation trials the trial index is encoded in the
//! instance id (`t012` = stream 12 of the master seed). Wall-clock fields
//! are informational only and excluded from reproducibility comparisons.

use serde::Serialize;

use crate::config::{RunConfig, Tolerances};
use crate::error::{LabError, LabResult};
use crate::runner::RowRecord;

/// Wall-clock per pipeline stage, milliseconds.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct StageTimings {
    /// Parsing + validating the config.
    pub config_ms: f64,
    /// Building grids, stencils, metrics (and perturbation draws).
    pub build_ms: f64,
    /// Running all cells.
    pub compute_ms: f64,
    /// Writing artifacts.
    pub write_ms: f64,
}

/// Identifies one row for single-row reproduction.
#[derive(Debug, Clone, Serialize)]
pub struct RowKey {
    pub instance_id: String,
    pub c1: f64,
    pub c2: f64,
    pub flag: String,
}

/// The `manifest.json` payload.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub threads: usize,
    pub tolerances: Tolerances,
    pub row_count: usize,
    pub rows_ok: usize,
    pub rows_degenerate: usize,
    pub rows_failed: usize,
    pub files: Vec<String>,
    pub timings: StageTimings,
    pub rows: Vec<RowKey>,
    /// The resolved configuration this run executed.
    pub config: RunConfig,
}

impl RunManifest {
    pub fn new(
        command: &str,
        cfg: &RunConfig,
        rows: &[RowRecord],
        files: Vec<String>,
        threads: usize,
        timings: StageTimings,
    ) -> Self {
        let rows_ok = rows.iter().filter(|r| r.flag == "ok").count();
        let rows_degenerate = rows.iter().filter(|r| r.flag == "degenerate").count();
        let rows_failed = rows
            .iter()
            .filter(|r| r.flag.starts_with("error:"))
            .count();
        RunManifest {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_hash: cfg.hash(),
            seed: cfg.master_seed(),
            threads,
            tolerances: cfg.tolerances,
            row_count: rows.len(),
            rows_ok,
            rows_degenerate,
            rows_failed,
            files,
            timings,
            rows: rows
                .iter()
                .map(|r| RowKey {
                    instance_id: r.instance_id.clone(),
                    c1: r.c1,
                    c2: r.c2,
                    flag: r.flag.clone(),
                })
                .collect(),
            config: cfg.clone(),
        }
    }

    /// Pretty JSON rendering.
    pub fn to_json(&self) -> LabResult<String> {
        serde_json::to_string_pretty(self).map_err(|e| LabError::Compute {
            stage: "manifest".into(),
            message: e.to_string(),
        })
    }
}
