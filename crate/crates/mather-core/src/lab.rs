//! The genericity laboratory: perturb, sweep, classify.
//!
//! The guiding expectation is rigidity of the quotient: for generic
//! conformal factors the Aubry set at a critical energy level decomposes
//! into very few static classes — never more than 1 + dim H¹(T², ℝ) = 3 —
//! while special (symmetric, integrable) metrics can realize huge or even
//! degenerate quotients. The lab makes that quantitative: run the whole
//! pipeline (critical value → timed graph → minimizing cycles → Aubry set →
//! static classes) over grids of cohomology classes and randomly perturbed
//! metrics, record the class counts, and flag any cell that violates the
//! bound.
//!
//! Perturbations act on the Lagrangian multiplicatively: u ↦ L·(1 + 2u),
//! i.e. f ↦ f + ln(1 + 2u), with u a small package of Gaussian bumps. The
//! positivity constraint 1 + 2u > 0 keeps the perturbed object a metric;
//! random draws enforce a safety margin and reject pathological samples.
//!
//! Every cell is self-contained and total: failures are folded into the
//! cell's flag instead of panicking, so a sweep always produces one row per
//! (metric, class) pair.

use alloc::vec::Vec;

use crate::alpha::{critical_value, ActionGraph, CriticalValueParams};
use crate::aubry::{aubry_set, static_classes, AubrySet, StaticClasses, DEFAULT_AUBRY_EPS};
use crate::grid::{
    build_metric, CohomologyClass, ConformalMetric, GaussianBump, MetricSpec, ScalarField,
    TorusGrid, VelocityStencil,
};
use crate::math;
use crate::measures::{
    assign_times, degenerate_zero_class_minimizers, enumerate_minimizers, min_mean_cycle,
    EnumerationParams, MinimizerSet, TimeAssignment,
};
use crate::rng::SeedStream;
use crate::{Error, Result};

/// 1 + dim H¹(T², ℝ): the generic ceiling for the number of static classes.
pub const HOMOLOGY_BOUND: usize = 3;

/// A conformal perturbation: u is a sum of Gaussian bumps on the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    pub bumps: Vec<GaussianBump>,
}

impl PerturbationSpec {
    /// Evaluate u at torus coordinates.
    pub fn eval(&self, x1: f64, x2: f64) -> f64 {
        self.bumps.iter().map(|b| b.eval(x1, x2)).sum()
    }
}

/// Sample u on the grid.
pub fn u_field(spec: &PerturbationSpec, grid: TorusGrid) -> ScalarField {
    let n = grid.n();
    let mut values = Vec::with_capacity(n * n);
    for idx in 0..n * n {
        let node = grid.node(idx);
        let (x1, x2) = grid.coords(node);
        values.push(spec.eval(x1, x2));
    }
    ScalarField::new(grid, values).expect("grid-shaped values")
}

/// Build the perturbed metric e^{f + ln(1+2u)} from a base spec and a
/// perturbation, failing with [`Error::MetricConstraint`] if 1 + 2u dips to
/// zero anywhere on the grid.
pub fn apply_perturbation(
    base: &MetricSpec,
    spec: &PerturbationSpec,
    grid: TorusGrid,
) -> Result<ConformalMetric> {
    let perturbed = MetricSpec::Perturbed {
        base: alloc::boxed::Box::new(base.clone()),
        u_bumps: spec.bumps.clone(),
    };
    build_metric(&perturbed, grid)
}

/// Draw a random perturbation: `count` bumps with centers uniform on the
/// torus, amplitudes uniform in [−eps, eps] and widths in [0.05, 0.2].
pub fn random_perturbation(rng: &mut SeedStream, eps: f64, count: usize) -> PerturbationSpec {
    let mut bumps = Vec::with_capacity(count);
    for _ in 0..count {
        let cx = rng.next_f64();
        let cy = rng.next_f64();
        let amplitude = rng.uniform(-eps, eps);
        let width = rng.uniform(0.05, 0.2);
        bumps.push(GaussianBump {
            cx,
            cy,
            amplitude,
            width,
        });
    }
    PerturbationSpec { bumps }
}

/// The perturbed metric for one experiment trial: stream `trial` of the
/// master seed, redrawn (up to 100 times) until the sampled u keeps a
/// safety margin min(1 + 2u) ≥ 0.01 on the grid.
pub fn trial_metric(
    base: &MetricSpec,
    grid: TorusGrid,
    eps: f64,
    bumps: usize,
    seed: u64,
    trial: u64,
) -> Result<ConformalMetric> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter("perturbation size must be ≥ 0"));
    }
    let mut rng = SeedStream::new(seed, trial);
    for _ in 0..100 {
        let spec = random_perturbation(&mut rng, eps, bumps);
        let field = u_field(&spec, grid);
        let mut margin = f64::INFINITY;
        for &u in field.values() {
            let guard = 1.0 + 2.0 * u;
            if guard < margin {
                margin = guard;
            }
        }
        if margin >= 0.01 {
            return apply_perturbation(base, &spec, grid);
        }
    }
    Err(Error::InvalidParameter(
        "perturbation rejection cap exceeded (eps too large)",
    ))
}

/// Per-cell tolerances and caps.
#[derive(Debug, Clone, Copy)]
pub struct CellParams {
    pub bisection: CriticalValueParams,
    pub eps_aubry: f64,
    pub enumeration: EnumerationParams,
}

impl Default for CellParams {
    fn default() -> Self {
        CellParams {
            bisection: CriticalValueParams::default(),
            eps_aubry: DEFAULT_AUBRY_EPS,
            enumeration: EnumerationParams::default(),
        }
    }
}

/// Why a cell's pipeline stopped where it did.
#[derive(Debug, Clone, PartialEq)]
pub enum CellFlag {
    /// Full pipeline ran.
    Ok,
    /// Zero class: α = 0 and everything degenerates to rest measures.
    Degenerate,
    /// A stage failed; the row carries data up to that stage.
    Failed { stage: &'static str, error: Error },
}

impl CellFlag {
    /// CSV-friendly rendering: `ok`, `degenerate` or `error:<stage>`.
    pub fn label(&self) -> alloc::string::String {
        use alloc::string::ToString;
        match self {
            CellFlag::Ok => "ok".to_string(),
            CellFlag::Degenerate => "degenerate".to_string(),
            CellFlag::Failed { stage, .. } => {
                let mut s = alloc::string::String::from("error:");
                s.push_str(stage);
                s
            }
        }
    }
}

/// Everything measured in one (metric, class) cell. Stages that never ran
/// hold NaN (floats) or zero (counts).
#[derive(Debug, Clone)]
pub struct CellResult {
    pub class: CohomologyClass,
    pub alpha: f64,
    pub bracket: (f64, f64),
    pub evaluations: u32,
    /// Minimum cycle mean of the timed graph.
    pub min_mean: f64,
    /// min_mean + alpha (≈ 0 when duality holds).
    pub duality_gap: f64,
    pub minimizer_count: usize,
    pub capped: bool,
    pub rotation_vectors: Vec<(f64, f64)>,
    pub aubry_count: usize,
    pub class_count: usize,
    /// class_count ≤ [`HOMOLOGY_BOUND`] (vacuously true when the class
    /// stage never ran — consult `flag`).
    pub bound_ok: bool,
    pub flag: CellFlag,
    /// Full minimizer detail when enumeration ran.
    pub minimizers: Option<MinimizerSet>,
    /// The Aubry set when that stage ran (node indices and return costs).
    pub aubry: Option<AubrySet>,
    /// The static-class partition when that stage ran.
    pub classes: Option<StaticClasses>,
}

fn failed_cell(class: CohomologyClass, stage: &'static str, error: Error) -> CellResult {
    CellResult {
        class,
        alpha: f64::NAN,
        bracket: (f64::NAN, f64::NAN),
        evaluations: 0,
        min_mean: f64::NAN,
        duality_gap: f64::NAN,
        minimizer_count: 0,
        capped: false,
        rotation_vectors: Vec::new(),
        aubry_count: 0,
        class_count: 0,
        bound_ok: true,
        flag: CellFlag::Failed { stage, error },
        minimizers: None,
        aubry: None,
        classes: None,
    }
}

/// Run the full pipeline for one metric and one cohomology class. Total:
/// every failure is captured in the returned flag.
pub fn run_cell(
    metric: &ConformalMetric,
    stencil: &VelocityStencil,
    class: CohomologyClass,
    params: &CellParams,
) -> CellResult {
    let g = match ActionGraph::build(metric, stencil, class) {
        Ok(g) => g,
        Err(e) => return failed_cell(class, "graph", e),
    };

    if class.is_zero() {
        // α(0) = 0: L ≥ 0 with equality on rest curves. Every node carries
        // a rest minimizer, the Aubry set is the whole grid and the quotient
        // collapses to a single class.
        let minimizers = match degenerate_zero_class_minimizers(&g, params.enumeration.max_count) {
            Ok(m) => m,
            Err(e) => return failed_cell(class, "enumerate", e),
        };
        let v = g.node_count();
        // At k = 0 and c = 0 every cycle has zero w-cost, so every node has
        // a zero-cost moving return and the δ pseudometric vanishes: the
        // whole grid is one static class.
        let aubry = AubrySet {
            k: 0.0,
            eps: params.eps_aubry,
            members: (0..v).collect(),
            cyc: alloc::vec![0.0; v],
        };
        let classes = StaticClasses {
            count: 1,
            assignment: alloc::vec![0; v],
            representatives: alloc::vec![0],
            delta: alloc::vec![0.0],
        };
        return CellResult {
            class,
            alpha: 0.0,
            bracket: (0.0, 0.0),
            evaluations: 0,
            min_mean: 0.0,
            duality_gap: 0.0,
            minimizer_count: minimizers.count_distinct,
            capped: minimizers.capped,
            rotation_vectors: minimizers.rotation_vectors.clone(),
            aubry_count: v,
            class_count: 1,
            bound_ok: true,
            flag: CellFlag::Degenerate,
            minimizers: Some(minimizers),
            aubry: Some(aubry),
            classes: Some(classes),
        };
    }

    let cv = match critical_value(&g, params.bisection) {
        Ok(cv) => cv,
        Err(e) => return failed_cell(class, "critical-value", e),
    };

    let tg = match assign_times(&g, TimeAssignment::EnergyLevel { alpha: cv.alpha }) {
        Ok(tg) => tg,
        Err(e) => return failed_cell(class, "times", e),
    };

    let mm = match min_mean_cycle(&tg) {
        Ok(mm) => mm,
        Err(e) => return failed_cell(class, "min-mean", e),
    };

    let minimizers = match enumerate_minimizers(&tg, params.enumeration) {
        Ok(m) => m,
        Err(e) => return failed_cell(class, "enumerate", e),
    };

    let set = match aubry_set(&g, cv.bracket.1, params.eps_aubry) {
        Ok(s) => s,
        Err(e) => return failed_cell(class, "aubry", e),
    };

    let classes = match static_classes(&g, &set) {
        Ok(c) => c,
        Err(e) => return failed_cell(class, "classes", e),
    };

    CellResult {
        class,
        alpha: cv.alpha,
        bracket: cv.bracket,
        evaluations: cv.evaluations,
        min_mean: mm.mean,
        duality_gap: mm.mean + cv.alpha,
        minimizer_count: minimizers.count_distinct,
        capped: minimizers.capped,
        rotation_vectors: minimizers.rotation_vectors.clone(),
        aubry_count: set.members.len(),
        class_count: classes.count,
        bound_ok: classes.count <= HOMOLOGY_BOUND,
        flag: CellFlag::Ok,
        minimizers: Some(minimizers),
        aubry: Some(set),
        classes: Some(classes),
    }
}

/// One row of a sweep: which metric, which class, what came out.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub metric_id: usize,
    pub class_index: usize,
    pub result: CellResult,
}

/// Run every (metric, class) cell sequentially, metrics outer, classes
/// inner. Callers wanting parallelism can map `run_cell` over the same
/// index set themselves — results are position-independent.
pub fn sweep(
    metrics: &[ConformalMetric],
    stencil: &VelocityStencil,
    classes: &[CohomologyClass],
    params: &CellParams,
) -> Vec<SweepCell> {
    let mut out = Vec::with_capacity(metrics.len() * classes.len());
    for (metric_id, metric) in metrics.iter().enumerate() {
        for (class_index, &class) in classes.iter().enumerate() {
            out.push(SweepCell {
                metric_id,
                class_index,
                result: run_cell(metric, stencil, class, params),
            });
        }
    }
    out
}

/// An evenly spaced fan of cohomology classes: `directions` angles times the
/// given magnitudes, optionally with the zero class in front.
pub fn default_class_grid(
    directions: usize,
    magnitudes: &[f64],
    include_zero: bool,
) -> Vec<CohomologyClass> {
    let mut out = Vec::new();
    if include_zero {
        out.push(CohomologyClass::zero());
    }
    let tau = 2.0 * core::f64::consts::PI;
    for &mag in magnitudes {
        for i in 0..directions {
            let theta = tau * (i as f64) / (directions as f64);
            out.push(CohomologyClass::new(
                mag * math::cos(theta),
                mag * math::sin(theta),
            ));
        }
    }
    out
}
