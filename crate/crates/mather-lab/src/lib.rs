//! The experiment harness around `mather-core`: configuration files,
//! sweep orchestration, CSV/JSON reports, and deterministic run manifests.
//!
//! The library backs the `mather` binary but is equally usable directly;
//! integration tests drive both. Layers:
//!
//! - [`config`]: the documented TOML grammar, validation, defaults, and the
//!   canonical config hash.
//! - [`runner`]: materializing metric instances (including seeded
//!   perturbation trials) and fanning the per-cell pipeline out on a rayon
//!   pool, deterministically.
//! - [`report`]: the pinned CSV schema, per-cell detail JSON, Aubry node
//!   lists, and the `runtime_ms` projection used by reproducibility checks.
//! - [`manifest`]: the JSON run manifest embedding the resolved config.
//! - [`error`]: harness errors and their exit-code mapping
//!   (0 success, 2 config, 3 computation, 4 I/O).

pub mod config;
pub mod error;
pub mod manifest;
pub mod report;
pub mod runner;

pub use error::{LabError, LabResult};
