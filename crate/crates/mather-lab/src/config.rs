//! Run configuration: the documented grammar, parsing, validation,
//! defaults, and the canonical hash.
//!
//! Configs are TOML. The full grammar (all keys, defaults in brackets):
//!
//! ```toml
//! [grid]
//! n = 16                  # grid side, n ≥ 4 (required)
//!
//! [stencil]
//! radius = 2              # velocity stencil radius, ≥ 1 (required)
//!
//! [[metrics]]             # [one flat metric] — repeat the block per metric
//! id = "flat"             # [m000, m001, …] unique instance id
//! kind = "flat"           # "flat" | "fourier" | "bumps"
//! # kind = "fourier" takes [[metrics.modes]] blocks:
//! #   mx, my (integers), amplitude, phase [0.0]
//! # kind = "bumps" takes [[metrics.bumps]] blocks:
//! #   cx, cy, amplitude, width
//!
//! [classes]               # [list = [[1.0, 0.0]]] — choose ONE style:
//! list = [[1.0, 0.0]]     # explicit classes, or
//! # directions = 8        # evenly spaced fan …
//! # magnitudes = [1.0]    # … at these radii …
//! # include_zero = false  # … optionally prepending c = 0
//!
//! [tolerances]            # every key optional
//! bisection = 1e-9        # critical-value bracket width
//! max_evaluations = 60    # negative-cycle probes per critical value
//! cycle_eps_per_edge = 1e-12  # certification threshold per edge
//! aubry = 1e-6            # Aubry membership threshold (absolute)
//! cluster_rel = 1e-6      # relative width of the minimizer cluster
//! energy = 1e-9           # documented energy-deviation budget (echoed)
//! max_minimizers = 64     # stored representatives per cell
//!
//! [experiment]            # required by `perturb`, optional otherwise
//! epsilon = 0.1           # perturbation size (≥ 0)
//! trials = 20             # number of seeded trials
//! bumps = 3               # [3] Gaussian bumps per draw
//! seed = 42               # master seed; required when trials > 0
//!
//! [output]
//! dir = "out"             # ["out"] artifact directory
//! ```
//!
//! Unknown keys anywhere are rejected, as are duplicate keys (parse error
//! with line/column). Validation errors name the offending field.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mather_core::grid::{CohomologyClass, FourierMode, GaussianBump, MetricSpec};
use mather_core::lab::default_class_grid;

use crate::error::{LabError, LabResult};

/// `[grid]` block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Grid side length; the torus carries n × n nodes.
    pub n: usize,
}

/// `[stencil]` block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StencilConfig {
    /// Disc radius of the velocity stencil (in grid steps per step).
    pub radius: i32,
}

/// One Fourier mode of the conformal exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeConfig {
    pub mx: i32,
    pub my: i32,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

/// One periodic Gaussian bump of the conformal exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpConfig {
    pub cx: f64,
    pub cy: f64,
    pub amplitude: f64,
    pub width: f64,
}

/// What kind of conformal factor a `[[metrics]]` block describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Flat,
    Fourier,
    Bumps,
}

/// One `[[metrics]]` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    /// Instance id used in result rows; filled to `m<index>` when absent.
    #[serde(default)]
    pub id: Option<String>,
    pub kind: MetricKind,
    /// Fourier modes (only for `kind = "fourier"`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modes: Vec<ModeConfig>,
    /// Gaussian bumps (only for `kind = "bumps"`).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bumps: Vec<BumpConfig>,
}

impl MetricConfig {
    /// The symbolic metric this block describes.
    pub fn spec(&self) -> MetricSpec {
        match self.kind {
            MetricKind::Flat => MetricSpec::Flat,
            MetricKind::Fourier => MetricSpec::Fourier(
                self.modes
                    .iter()
                    .map(|m| FourierMode {
                        mx: m.mx,
                        my: m.my,
                        amplitude: m.amplitude,
                        phase: m.phase,
                    })
                    .collect(),
            ),
            MetricKind::Bumps => MetricSpec::Bumps(
                self.bumps
                    .iter()
                    .map(|b| GaussianBump {
                        cx: b.cx,
                        cy: b.cy,
                        amplitude: b.amplitude,
                        width: b.width,
                    })
                    .collect(),
            ),
        }
    }
}

/// `[classes]` block: either an explicit list or an evenly spaced fan.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassesConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub list: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnitudes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub include_zero: Option<bool>,
}

impl ClassesConfig {
    /// The concrete cohomology classes this block describes.
    pub fn resolve(&self) -> Vec<CohomologyClass> {
        if let Some(list) = &self.list {
            return list
                .iter()
                .map(|&[c1, c2]| CohomologyClass::new(c1, c2))
                .collect();
        }
        let directions = self.directions.unwrap_or(0);
        let magnitudes = self.magnitudes.clone().unwrap_or_default();
        default_class_grid(directions, &magnitudes, self.include_zero.unwrap_or(false))
    }
}

fn default_max_evaluations() -> u32 {
    60
}
fn default_bisection() -> f64 {
    1e-9
}
fn default_cycle_eps_per_edge() -> f64 {
    1e-12
}
fn default_aubry() -> f64 {
    1e-6
}
fn default_cluster_rel() -> f64 {
    1e-6
}
fn default_energy() -> f64 {
    1e-9
}
fn default_max_minimizers() -> usize {
    64
}

/// `[tolerances]` block. Every field has a documented default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_bisection")]
    pub bisection: f64,
    #[serde(default = "default_max_evaluations")]
    pub max_evaluations: u32,
    #[serde(default = "default_cycle_eps_per_edge")]
    pub cycle_eps_per_edge: f64,
    #[serde(default = "default_aubry")]
    pub aubry: f64,
    #[serde(default = "default_cluster_rel")]
    pub cluster_rel: f64,
    #[serde(default = "default_energy")]
    pub energy: f64,
    #[serde(default = "default_max_minimizers")]
    pub max_minimizers: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            bisection: default_bisection(),
            max_evaluations: default_max_evaluations(),
            cycle_eps_per_edge: default_cycle_eps_per_edge(),
            aubry: default_aubry(),
            cluster_rel: default_cluster_rel(),
            energy: default_energy(),
            max_minimizers: default_max_minimizers(),
        }
    }
}

fn default_bump_count() -> usize {
    3
}

/// `[experiment]` block: the seeded perturbation harness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Perturbation size ε (uniform bump amplitudes in [−ε, ε]).
    pub epsilon: f64,
    /// Number of seeded trials.
    pub trials: u64,
    /// Gaussian bumps per perturbation draw.
    #[serde(default = "default_bump_count")]
    pub bumps: usize,
    /// Master seed; required whenever `trials > 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// `[output]` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_output_dir")]
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: default_output_dir(),
        }
    }
}

/// A fully parsed, validated run configuration with all defaults filled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub stencil: StencilConfig,
    #[serde(default)]
    pub metrics: Vec<MetricConfig>,
    #[serde(default)]
    pub classes: ClassesConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Command-line overrides applied on top of a parsed config (before
/// validation and hashing, so the hash always reflects the effective run).
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub grid_n: Option<usize>,
    pub radius: Option<i32>,
}

impl RunConfig {
    /// Fill documented defaults that serde cannot express: a flat metric
    /// when no `[[metrics]]` block is given, the class list `[[1, 0]]` when
    /// `[classes]` is empty, and sequential metric ids.
    pub fn fill_defaults(&mut self) {
        if self.metrics.is_empty() {
            self.metrics.push(MetricConfig {
                id: None,
                kind: MetricKind::Flat,
                modes: Vec::new(),
                bumps: Vec::new(),
            });
        }
        for (i, m) in self.metrics.iter_mut().enumerate() {
            if m.id.is_none() {
                m.id = Some(format!("m{i:03}"));
            }
        }
        let c = &self.classes;
        if c.list.is_none()
            && c.directions.is_none()
            && c.magnitudes.is_none()
            && c.include_zero.is_none()
        {
            self.classes.list = Some(vec![[1.0, 0.0]]);
        }
    }

    /// Apply command-line overrides.
    pub fn apply_overrides(&mut self, ov: &Overrides) {
        if let Some(out) = &ov.out {
            self.output.dir = out.clone();
        }
        if let Some(n) = ov.grid_n {
            self.grid.n = n;
        }
        if let Some(r) = ov.radius {
            self.stencil.radius = r;
        }
        if let Some(seed) = ov.seed {
            match &mut self.experiment {
                Some(e) => e.seed = Some(seed),
                None => {
                    self.experiment = Some(ExperimentConfig {
                        epsilon: 0.0,
                        trials: 0,
                        bumps: default_bump_count(),
                        seed: Some(seed),
                    });
                }
            }
        }
    }

    /// Check every documented invariant; errors name the offending field.
    pub fn validate(&self) -> LabResult<()> {
        fn fail(msg: String) -> LabResult<()> {
            Err(LabError::Config(msg))
        }
        if self.grid.n < 4 {
            return fail(format!("grid.n: must be ≥ 4 (got {})", self.grid.n));
        }
        if self.stencil.radius < 1 {
            return fail(format!(
                "stencil.radius: must be ≥ 1 (got {})",
                self.stencil.radius
            ));
        }
        let t = &self.tolerances;
        for (name, value) in [
            ("tolerances.bisection", t.bisection),
            ("tolerances.cycle_eps_per_edge", t.cycle_eps_per_edge),
            ("tolerances.aubry", t.aubry),
            ("tolerances.cluster_rel", t.cluster_rel),
            ("tolerances.energy", t.energy),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return fail(format!("{name}: must be a positive finite number (got {value})"));
            }
        }
        if t.max_evaluations == 0 {
            return fail("tolerances.max_evaluations: must be ≥ 1".into());
        }
        if t.max_minimizers == 0 {
            return fail("tolerances.max_minimizers: must be ≥ 1".into());
        }
        for (i, m) in self.metrics.iter().enumerate() {
            match m.kind {
                MetricKind::Flat => {
                    if !m.modes.is_empty() || !m.bumps.is_empty() {
                        return fail(format!(
                            "metrics[{i}]: kind \"flat\" takes no modes or bumps"
                        ));
                    }
                }
                MetricKind::Fourier => {
                    if m.modes.is_empty() {
                        return fail(format!(
                            "metrics[{i}].modes: kind \"fourier\" needs at least one mode"
                        ));
                    }
                    if !m.bumps.is_empty() {
                        return fail(format!("metrics[{i}].bumps: not allowed for kind \"fourier\""));
                    }
                }
                MetricKind::Bumps => {
                    if m.bumps.is_empty() {
                        return fail(format!(
                            "metrics[{i}].bumps: kind \"bumps\" needs at least one bump"
                        ));
                    }
                    if !m.modes.is_empty() {
                        return fail(format!("metrics[{i}].modes: not allowed for kind \"bumps\""));
                    }
                }
            }
            for (j, mode) in m.modes.iter().enumerate() {
                if !mode.amplitude.is_finite() || !mode.phase.is_finite() {
                    return fail(format!("metrics[{i}].modes[{j}]: non-finite value"));
                }
            }
            for (j, b) in m.bumps.iter().enumerate() {
                if !(b.width > 0.0) || !b.width.is_finite() {
                    return fail(format!(
                        "metrics[{i}].bumps[{j}].width: must be a positive finite number"
                    ));
                }
                if !b.cx.is_finite() || !b.cy.is_finite() || !b.amplitude.is_finite() {
                    return fail(format!("metrics[{i}].bumps[{j}]: non-finite value"));
                }
            }
        }
        for (i, m) in self.metrics.iter().enumerate() {
            for earlier in &self.metrics[..i] {
                if m.id.is_some() && m.id == earlier.id {
                    return fail(format!(
                        "metrics[{i}].id: duplicate id {:?}",
                        m.id.as_deref().unwrap_or("")
                    ));
                }
            }
        }
        let c = &self.classes;
        let has_fan = c.directions.is_some() || c.magnitudes.is_some() || c.include_zero.is_some();
        match (&c.list, has_fan) {
            (Some(_), true) => {
                return fail(
                    "classes: give either `list` or a fan (directions/magnitudes), not both"
                        .into(),
                )
            }
            (None, false) => {
                return fail("classes: give `list` or a fan (directions/magnitudes)".into())
            }
            (Some(list), false) => {
                if list.is_empty() {
                    return fail("classes.list: must not be empty".into());
                }
                for (i, &[c1, c2]) in list.iter().enumerate() {
                    if !c1.is_finite() || !c2.is_finite() {
                        return fail(format!("classes.list[{i}]: non-finite class"));
                    }
                }
            }
            (None, true) => {
                let d = match c.directions {
                    Some(d) => d,
                    None => return fail("classes.directions: required for a class fan".into()),
                };
                if d == 0 {
                    return fail("classes.directions: must be ≥ 1".into());
                }
                let mags = match &c.magnitudes {
                    Some(m) => m,
                    None => return fail("classes.magnitudes: required for a class fan".into()),
                };
                if mags.is_empty() && !c.include_zero.unwrap_or(false) {
                    return fail("classes.magnitudes: must not be empty".into());
                }
                for (i, &m) in mags.iter().enumerate() {
                    if !(m > 0.0) || !m.is_finite() {
                        return fail(format!(
                            "classes.magnitudes[{i}]: must be a positive finite number"
                        ));
                    }
                }
            }
        }
        if let Some(e) = &self.experiment {
            if !(e.epsilon >= 0.0) || !e.epsilon.is_finite() {
                return fail(format!(
                    "experiment.epsilon: must be a finite number ≥ 0 (got {})",
                    e.epsilon
                ));
            }
            if e.trials > 0 && e.seed.is_none() {
                return fail("experiment.seed: required when experiment.trials > 0".into());
            }
            if e.bumps == 0 {
                return fail("experiment.bumps: must be ≥ 1".into());
            }
        }
        Ok(())
    }

    /// The master seed echoed into every result row (0 for runs without an
    /// experiment block: nothing random happens in them).
    pub fn master_seed(&self) -> u64 {
        self.experiment.and_then(|e| e.seed).unwrap_or(0)
    }

    /// SHA-256 of the canonical serialization (JSON of the filled,
    /// validated config). Stable under key reordering and formatting of
    /// the input file because it hashes the parsed structure, not the
    /// text. The `[output]` block is excluded: where artifacts land is not
    /// part of the experiment, and identical runs into different
    /// directories must carry identical hashes.
    pub fn hash(&self) -> String {
        let mut science = self.clone();
        science.output = OutputConfig::default();
        let canonical =
            serde_json::to_string(&science).expect("config serialization cannot fail");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            use std::fmt::Write;
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }

    /// Serialize back to TOML (round-trips through [`parse_config`]).
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization cannot fail")
    }
}

/// Parse, fill defaults, and validate a TOML configuration.
pub fn parse_config(text: &str) -> LabResult<RunConfig> {
    let mut cfg: RunConfig =
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
    cfg.fill_defaults();
    cfg.validate()?;
    Ok(cfg)
}

/// [`parse_config`] plus command-line overrides (applied before validation
/// so the config hash reflects the effective run).
pub fn parse_config_with_overrides(text: &str, ov: &Overrides) -> LabResult<RunConfig> {
    let mut cfg: RunConfig =
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
    cfg.fill_defaults();
    cfg.apply_overrides(ov);
    cfg.validate()?;
    Ok(cfg)
}
