//! Result persistence: the pinned CSV schema, detail JSON, and node lists.
//!
//! The CSV column order is a stable downstream contract:
//!
//! ```text
//! instance_id, seed, c1, c2, alpha, minimizer_count, class_count,
//! bound_ok, max_energy_dev, min_mean, duality_gap, aubry_count,
//! evaluations, capped, flag, tol_bisection, tol_cycle_eps_per_edge,
//! tol_aubry, tol_cluster_rel, tol_energy, config_hash, runtime_ms
//! ```
//!
//! Every row echoes the run's config hash, master seed, and tolerances.
//! All columns are deterministic functions of the config except
//! `runtime_ms`, which is deliberately kept *last* so reproducibility
//! comparisons can project it out (see [`project_out_column`]); wall-clock
//! data also lives in the JSON manifest, which is likewise excluded from
//! byte comparisons. Empty fields mean "stage did not run".

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{LabError, LabResult};
use crate::runner::{CellDetail, RowRecord};

/// One serialized CSV record; field order is the column order.
#[derive(Debug, Serialize)]
struct CsvRecord<'a> {
    instance_id: &'a str,
    seed: u64,
    c1: f64,
    c2: f64,
    alpha: Option<f64>,
    minimizer_count: Option<usize>,
    class_count: Option<usize>,
    bound_ok: Option<bool>,
    max_energy_dev: Option<f64>,
    min_mean: Option<f64>,
    duality_gap: Option<f64>,
    aubry_count: Option<usize>,
    evaluations: u32,
    capped: Option<bool>,
    flag: &'a str,
    tol_bisection: f64,
    tol_cycle_eps_per_edge: f64,
    tol_aubry: f64,
    tol_cluster_rel: f64,
    tol_energy: f64,
    config_hash: &'a str,
    runtime_ms: f64,
}

/// Render rows to CSV text (headers included, `\n` line endings).
pub fn csv_string(
    rows: &[RowRecord],
    tol: &Tolerances,
    config_hash: &str,
    seed: u64,
) -> LabResult<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        let record = CsvRecord {
            instance_id: &row.instance_id,
            seed,
            c1: row.c1,
            c2: row.c2,
            alpha: row.alpha,
            minimizer_count: row.minimizer_count,
            class_count: row.class_count,
            bound_ok: row.bound_ok,
            max_energy_dev: row.max_energy_dev,
            min_mean: row.min_mean,
            duality_gap: row.duality_gap,
            aubry_count: row.aubry_count,
            evaluations: row.evaluations,
            capped: row.capped,
            flag: &row.flag,
            tol_bisection: tol.bisection,
            tol_cycle_eps_per_edge: tol.cycle_eps_per_edge,
            tol_aubry: tol.aubry,
            tol_cluster_rel: tol.cluster_rel,
            tol_energy: tol.energy,
            config_hash,
            runtime_ms: row.runtime_ms,
        };
        writer.serialize(record).map_err(|e| LabError::Compute {
            stage: "csv".into(),
            message: e.to_string(),
        })?;
    }
    let bytes = writer.into_inner().map_err(|e| LabError::Compute {
        stage: "csv".into(),
        message: e.to_string(),
    })?;
    String::from_utf8(bytes).map_err(|e| LabError::Compute {
        stage: "csv".into(),
        message: e.to_string(),
    })
}

/// Drop one named column from CSV text. Reproducibility checks apply this
/// to `runtime_ms` — the only column that legitimately varies between
/// identically-configured runs — before comparing bytes.
pub fn project_out_column(csv_text: &str, column: &str) -> LabResult<String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(csv_text.as_bytes());
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut drop_idx: Option<usize> = None;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| LabError::Compute {
            stage: "csv".into(),
            message: e.to_string(),
        })?;
        if line == 0 {
            drop_idx = record.iter().position(|f| f == column);
        }
        let keep = record
            .iter()
            .enumerate()
            .filter(|&(i, _)| Some(i) != drop_idx)
            .map(|(_, f)| f);
        writer.write_record(keep).map_err(|e| LabError::Compute {
            stage: "csv".into(),
            message: e.to_string(),
        })?;
    }
    let bytes = writer.into_inner().map_err(|e| LabError::Compute {
        stage: "csv".into(),
        message: e.to_string(),
    })?;
    String::from_utf8(bytes).map_err(|e| LabError::Compute {
        stage: "csv".into(),
        message: e.to_string(),
    })
}

/// The `details.json` payload.
#[derive(Debug, Serialize)]
pub struct DetailsFile<'a> {
    pub artifact_version: &'a str,
    pub config_hash: &'a str,
    pub seed: u64,
    pub cells: Vec<&'a CellDetail>,
}

/// Render the per-cell detail JSON (pretty-printed, stable field order).
pub fn details_string(
    rows: &[RowRecord],
    config_hash: &str,
    seed: u64,
) -> LabResult<String> {
    let details = DetailsFile {
        artifact_version: env!("CARGO_PKG_VERSION"),
        config_hash,
        seed,
        cells: rows.iter().filter_map(|r| r.detail.as_ref()).collect(),
    };
    serde_json::to_string_pretty(&details).map_err(|e| LabError::Compute {
        stage: "details".into(),
        message: e.to_string(),
    })
}

/// Render the Aubry node-list file: one line per Aubry node per cell,
/// `instance_id,c1,c2,ix,iy`, cells in row order.
pub fn aubry_nodes_string(rows: &[RowRecord]) -> String {
    let mut out = String::from("instance_id,c1,c2,ix,iy\n");
    for row in rows {
        if let Some(detail) = &row.detail {
            for nd in &detail.aubry_nodes {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    detail.instance_id, detail.c[0], detail.c[1], nd[0], nd[1]
                ));
            }
        }
    }
    out
}

/// Write a text artifact, creating parent directories as needed.
pub fn write_text(path: &Path, text: &str) -> LabResult<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| LabError::io(parent.display().to_string(), e))?;
    }
    fs::write(path, text).map_err(|e| LabError::io(path.display().to_string(), e))
}
