//! Turning a validated config into result rows.
//!
//! The runner materializes metric instances, fans out over
//! (instance, class) cells — optionally on a rayon pool — and flattens each
//! cell into a CSV-shaped [`RowRecord`] plus an optional JSON-shaped
//! [`CellDetail`]. All science lives in `mather-core`; this module only
//! orchestrates and reshapes.
//!
//! Determinism: rows are collected with an indexed parallel map, so their
//! order is the cell order (instances outer, classes inner) regardless of
//! thread count, and every numeric field is a deterministic function of the
//! config. Only `runtime_ms` varies between runs; it is excluded from
//! reproducibility comparisons (see the report module).

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use mather_core::alpha::{critical_value, ActionGraph, CriticalValueParams};
use mather_core::grid::{
    build_metric, CohomologyClass, ConformalMetric, TorusGrid, VelocityStencil,
};
use mather_core::lab::{run_cell, trial_metric, CellFlag, CellParams, CellResult};
use mather_core::measures::{
    assign_times, cycle_to_measure, support_energy_check, EnumerationParams, TimeAssignment,
};

use crate::config::{RunConfig, Tolerances};
use crate::error::{LabError, LabResult};

/// How deep each cell runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Depth {
    /// Critical value only (the `alpha` subcommand).
    AlphaOnly,
    /// The whole pipeline: α, minimizing cycles, Aubry set, static classes.
    Full,
}

/// One concrete metric to sweep, with the id that tags its rows.
#[derive(Debug, Clone)]
pub struct Instance {
    pub id: String,
    pub metric: ConformalMetric,
    /// The perturbation trial index (perturb runs only).
    pub trial: Option<u64>,
}

/// One occupation-measure atom, JSON-shaped.
#[derive(Debug, Clone, Serialize)]
pub struct AtomDetail {
    pub tail: [usize; 2],
    pub head: [usize; 2],
    pub rate: f64,
    pub h: f64,
    pub speed_sq: f64,
}

/// One minimizing measure, JSON-shaped.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureDetail {
    /// Index of the representative cycle this measure came from.
    pub cycle: usize,
    pub rotation_vector: [f64; 2],
    /// Max |½ m²|v|² − α| over the support.
    pub energy_dev: f64,
    pub atoms: Vec<AtomDetail>,
}

/// Everything worth keeping from one cell beyond the CSV row.
#[derive(Debug, Clone, Serialize)]
pub struct CellDetail {
    pub instance_id: String,
    pub c: [f64; 2],
    pub flag: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_mean: Option<f64>,
    pub minimizer_count: usize,
    pub capped: bool,
    pub rotation_vectors: Vec<[f64; 2]>,
    /// Node path (grid coordinates) of each stored representative cycle.
    pub minimizer_cycles: Vec<Vec<[usize; 2]>>,
    /// Aubry nodes, ascending by node index.
    pub aubry_nodes: Vec<[usize; 2]>,
    pub class_count: usize,
    /// Static-class id of each Aubry node (parallel to `aubry_nodes`).
    pub class_assignment: Vec<usize>,
    /// Smallest node of each static class.
    pub class_representatives: Vec<[usize; 2]>,
    /// Occupation measures of the representatives (only when requested).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub measures: Vec<MeasureDetail>,
}

/// One result row, CSV-shaped. `None` means the stage never ran (the
/// subcommand stops earlier, or an upstream stage failed).
#[derive(Debug, Clone)]
pub struct RowRecord {
    pub instance_id: String,
    pub c1: f64,
    pub c2: f64,
    pub alpha: Option<f64>,
    pub minimizer_count: Option<usize>,
    pub class_count: Option<usize>,
    pub bound_ok: Option<bool>,
    pub max_energy_dev: Option<f64>,
    pub min_mean: Option<f64>,
    pub duality_gap: Option<f64>,
    pub aubry_count: Option<usize>,
    pub evaluations: u32,
    pub capped: Option<bool>,
    pub flag: String,
    pub runtime_ms: f64,
    /// JSON detail (full-depth cells only).
    pub detail: Option<CellDetail>,
}

/// Translate the config's tolerance block into per-cell parameters.
/// `edge_count` converts the per-edge certification budget into the
/// absolute threshold the detector uses.
pub fn cell_params(tol: &Tolerances, edge_count: usize) -> CellParams {
    CellParams {
        bisection: CriticalValueParams {
            tol: tol.bisection,
            max_evaluations: tol.max_evaluations,
            eps_cycle: Some(tol.cycle_eps_per_edge * edge_count as f64),
        },
        eps_aubry: tol.aubry,
        enumeration: EnumerationParams {
            max_count: tol.max_minimizers,
            cluster_rel: tol.cluster_rel,
        },
    }
}

/// Build the configured grid and stencil.
pub fn build_geometry(cfg: &RunConfig) -> LabResult<(TorusGrid, VelocityStencil)> {
    let grid = TorusGrid::new(cfg.grid.n)
        .map_err(|e| LabError::Config(format!("grid.n: {e}")))?;
    let stencil = VelocityStencil::disc(cfg.stencil.radius)
        .map_err(|e| LabError::Config(format!("stencil.radius: {e}")))?;
    Ok((grid, stencil))
}

/// Materialize the configured metrics.
pub fn build_instances(cfg: &RunConfig, grid: TorusGrid) -> LabResult<Vec<Instance>> {
    let mut out = Vec::with_capacity(cfg.metrics.len());
    for m in &cfg.metrics {
        let metric = build_metric(&m.spec(), grid).map_err(|e| LabError::Compute {
            stage: "build-metric".into(),
            message: format!("metric {:?}: {e}", m.id.as_deref().unwrap_or("?")),
        })?;
        out.push(Instance {
            id: m.id.clone().unwrap_or_default(),
            metric,
            trial: None,
        });
    }
    Ok(out)
}

/// Materialize the seeded perturbation trials of the first configured
/// metric (the `perturb` subcommand).
pub fn build_trial_instances(cfg: &RunConfig, grid: TorusGrid) -> LabResult<Vec<Instance>> {
    let exp = cfg.experiment.as_ref().ok_or_else(|| {
        LabError::Config("experiment: block required by the perturb subcommand".into())
    })?;
    if exp.trials == 0 {
        return Err(LabError::Config(
            "experiment.trials: must be ≥ 1 for the perturb subcommand".into(),
        ));
    }
    let seed = exp.seed.ok_or_else(|| {
        LabError::Config("experiment.seed: required when experiment.trials > 0".into())
    })?;
    let base = cfg.metrics[0].spec();
    let mut out = Vec::with_capacity(exp.trials as usize);
    for trial in 0..exp.trials {
        let metric = trial_metric(&base, grid, exp.epsilon, exp.bumps, seed, trial).map_err(
            |e| LabError::Compute {
                stage: "perturbation".into(),
                message: format!("trial {trial}: {e}"),
            },
        )?;
        out.push(Instance {
            id: format!("t{trial:03}"),
            metric,
            trial: Some(trial),
        });
    }
    Ok(out)
}

fn coords(grid: TorusGrid, index: usize) -> [usize; 2] {
    let node = grid.node(index);
    [node.ix, node.iy]
}

/// Flatten a full-pipeline [`CellResult`] into a row plus detail.
/// Rebuilds the cell's action graph once to decode cycle nodes and to put
/// each stored minimizer through the occupation-measure energy check.
fn flatten_full_cell(
    instance_id: &str,
    metric: &ConformalMetric,
    stencil: &VelocityStencil,
    cell: &CellResult,
    with_measures: bool,
) -> (RowRecord, Option<CellDetail>) {
    let grid = metric.grid();
    let class = cell.class;
    let flag = cell.flag.label();
    let ran_alpha = cell.alpha.is_finite();
    let ran_mean = cell.min_mean.is_finite();

    let mut row = RowRecord {
        instance_id: instance_id.to_string(),
        c1: class.c1,
        c2: class.c2,
        alpha: ran_alpha.then_some(cell.alpha),
        minimizer_count: cell.minimizers.as_ref().map(|m| m.count_distinct),
        class_count: cell.classes.as_ref().map(|c| c.count),
        bound_ok: cell.classes.as_ref().map(|_| cell.bound_ok),
        max_energy_dev: None,
        min_mean: ran_mean.then_some(cell.min_mean),
        duality_gap: (ran_alpha && ran_mean).then_some(cell.duality_gap),
        aubry_count: cell.aubry.as_ref().map(|a| a.members.len()),
        evaluations: cell.evaluations,
        capped: cell.minimizers.as_ref().map(|m| m.capped),
        flag: flag.clone(),
        runtime_ms: 0.0,
        detail: None,
    };

    let mut detail = CellDetail {
        instance_id: instance_id.to_string(),
        c: [class.c1, class.c2],
        flag,
        alpha: row.alpha,
        bracket: ran_alpha.then_some([cell.bracket.0, cell.bracket.1]),
        min_mean: row.min_mean,
        minimizer_count: cell.minimizers.as_ref().map_or(0, |m| m.count_distinct),
        capped: cell.minimizers.as_ref().is_some_and(|m| m.capped),
        rotation_vectors: cell
            .rotation_vectors
            .iter()
            .map(|&(a, b)| [a, b])
            .collect(),
        minimizer_cycles: Vec::new(),
        aubry_nodes: cell
            .aubry
            .as_ref()
            .map(|a| a.members.iter().map(|&i| coords(grid, i)).collect())
            .unwrap_or_default(),
        class_count: cell.classes.as_ref().map_or(0, |c| c.count),
        class_assignment: cell
            .classes
            .as_ref()
            .map(|c| c.assignment.clone())
            .unwrap_or_default(),
        class_representatives: cell
            .classes
            .as_ref()
            .map(|c| c.representatives.iter().map(|&i| coords(grid, i)).collect())
            .unwrap_or_default(),
        measures: Vec::new(),
    };

    // Decode representative cycles and run the on-shell energy check. The
    // degenerate zero class is exact by construction: rest measures at
    // level α = 0 have kinetic energy 0, so the deviation is 0 without any
    // timed graph (which would reject α = 0 anyway).
    if let Some(set) = &cell.minimizers {
        if let Ok(g) = ActionGraph::build(metric, stencil, class) {
            for cyc in &set.cycles {
                let nodes: Vec<[usize; 2]> = cyc
                    .edges()
                    .iter()
                    .map(|&e| coords(grid, g.tail(e)))
                    .collect();
                detail.minimizer_cycles.push(nodes);
            }
            if cell.alpha == 0.0 {
                row.max_energy_dev = Some(0.0);
            } else if cell.alpha.is_finite() && cell.alpha > 0.0 {
                if let Ok(tg) =
                    assign_times(&g, TimeAssignment::EnergyLevel { alpha: cell.alpha })
                {
                    let mut worst = 0.0f64;
                    let mut any = false;
                    for (i, cyc) in set.cycles.iter().enumerate() {
                        if let Ok(mu) = cycle_to_measure(&tg, cyc) {
                            let (dev, _) = support_energy_check(&mu, cell.alpha);
                            worst = worst.max(dev);
                            any = true;
                            if with_measures {
                                let atoms = mu
                                    .atoms()
                                    .iter()
                                    .map(|a| AtomDetail {
                                        tail: coords(grid, a.tail),
                                        head: coords(grid, a.head),
                                        rate: a.rate,
                                        h: a.h,
                                        speed_sq: a.speed_sq,
                                    })
                                    .collect();
                                detail.measures.push(MeasureDetail {
                                    cycle: i,
                                    rotation_vector: [
                                        set.rotation_vectors[i].0,
                                        set.rotation_vectors[i].1,
                                    ],
                                    energy_dev: dev,
                                    atoms,
                                });
                            }
                        }
                    }
                    if any {
                        row.max_energy_dev = Some(worst);
                    }
                }
            }
        }
    }

    (row, Some(detail))
}

/// Run one cell at the requested depth.
fn run_row(
    instance: &Instance,
    stencil: &VelocityStencil,
    class: CohomologyClass,
    params: &CellParams,
    depth: Depth,
    with_measures: bool,
) -> RowRecord {
    let start = Instant::now();
    let mut row = match depth {
        Depth::Full => {
            let cell = run_cell(&instance.metric, stencil, class, params);
            let (mut row, detail) =
                flatten_full_cell(&instance.id, &instance.metric, stencil, &cell, with_measures);
            row.detail = detail;
            row
        }
        Depth::AlphaOnly => {
            let mut row = RowRecord {
                instance_id: instance.id.clone(),
                c1: class.c1,
                c2: class.c2,
                alpha: None,
                minimizer_count: None,
                class_count: None,
                bound_ok: None,
                max_energy_dev: None,
                min_mean: None,
                duality_gap: None,
                aubry_count: None,
                evaluations: 0,
                capped: None,
                flag: String::new(),
                runtime_ms: 0.0,
                detail: None,
            };
            match ActionGraph::build(&instance.metric, stencil, class) {
                Err(e) => {
                    row.flag = CellFlag::Failed {
                        stage: "graph",
                        error: e,
                    }
                    .label();
                }
                Ok(g) => {
                    if class.is_zero() {
                        row.alpha = Some(0.0);
                        row.flag = "degenerate".into();
                    } else {
                        match critical_value(&g, params.bisection) {
                            Ok(cv) => {
                                row.alpha = Some(cv.alpha);
                                row.evaluations = cv.evaluations;
                                row.flag = "ok".into();
                            }
                            Err(e) => {
                                row.flag = CellFlag::Failed {
                                    stage: "critical-value",
                                    error: e,
                                }
                                .label();
                            }
                        }
                    }
                }
            }
            row
        }
    };
    row.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    row
}

/// Run every (instance, class) cell, instances outer, classes inner.
/// `threads` sizes a dedicated rayon pool (`None`/`Some(0)` = one thread
/// per core); the row order is independent of it.
pub fn run_table(
    cfg: &RunConfig,
    instances: &[Instance],
    stencil: &VelocityStencil,
    depth: Depth,
    with_measures: bool,
    threads: Option<usize>,
) -> LabResult<Vec<RowRecord>> {
    let classes = cfg.classes.resolve();
    let edge_count = cfg.grid.n * cfg.grid.n * stencil.len();
    let params = cell_params(&cfg.tolerances, edge_count);

    let cells: Vec<(usize, usize)> = (0..instances.len())
        .flat_map(|i| (0..classes.len()).map(move |j| (i, j)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| LabError::Compute {
            stage: "thread-pool".into(),
            message: e.to_string(),
        })?;

    let rows = pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, j)| {
                run_row(
                    &instances[i],
                    stencil,
                    classes[j],
                    &params,
                    depth,
                    with_measures,
                )
            })
            .collect::<Vec<_>>()
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn flat_cfg(n: usize, radius: i32, classes: &str) -> RunConfig {
        parse_config(&format!(
            "[grid]\nn = {n}\n\n[stencil]\nradius = {radius}\n\n[classes]\n{classes}\n"
        ))
        .unwrap()
    }

    #[test]
    fn alpha_only_rows_fill_alpha_and_nothing_else() {
        let cfg = flat_cfg(8, 1, "list = [[1.0, 0.0], [0.0, 0.0]]");
        let (grid, stencil) = build_geometry(&cfg).unwrap();
        let instances = build_instances(&cfg, grid).unwrap();
        let rows =
            run_table(&cfg, &instances, &stencil, Depth::AlphaOnly, false, Some(1)).unwrap();
        assert_eq!(rows.len(), 2);
        assert!((rows[0].alpha.unwrap() - 0.5).abs() < 1e-6);
        assert_eq!(rows[0].flag, "ok");
        assert!(rows[0].min_mean.is_none() && rows[0].class_count.is_none());
        assert_eq!(rows[1].alpha, Some(0.0));
        assert_eq!(rows[1].flag, "degenerate");
    }

    #[test]
    fn full_rows_carry_counts_detail_and_energy_check() {
        let cfg = flat_cfg(8, 1, "list = [[1.0, 0.0]]");
        let (grid, stencil) = build_geometry(&cfg).unwrap();
        let instances = build_instances(&cfg, grid).unwrap();
        let rows = run_table(&cfg, &instances, &stencil, Depth::Full, true, Some(1)).unwrap();
        let row = &rows[0];
        assert_eq!(row.flag, "ok");
        assert_eq!(row.minimizer_count, Some(8));
        assert_eq!(row.aubry_count, Some(64));
        assert_eq!(row.class_count, Some(8));
        assert_eq!(row.bound_ok, Some(false));
        assert!(row.max_energy_dev.unwrap() <= 1e-12);
        assert!(row.duality_gap.unwrap().abs() < 1e-6);
        let detail = row.detail.as_ref().unwrap();
        assert_eq!(detail.aubry_nodes.len(), 64);
        assert_eq!(detail.minimizer_cycles.len(), 8);
        assert_eq!(detail.measures.len(), 8);
        // every stored flat minimizer is a horizontal row: 8 nodes, constant iy
        for cyc in &detail.minimizer_cycles {
            assert_eq!(cyc.len(), 8);
            assert!(cyc.iter().all(|nd| nd[1] == cyc[0][1]));
        }
        let mass: f64 = detail.measures[0].atoms.iter().map(|a| a.rate * a.h).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn row_order_is_independent_of_thread_count() {
        let cfg = flat_cfg(8, 1, "directions = 4\nmagnitudes = [1.0]");
        let (grid, stencil) = build_geometry(&cfg).unwrap();
        let instances = build_instances(&cfg, grid).unwrap();
        let a = run_table(&cfg, &instances, &stencil, Depth::Full, false, Some(1)).unwrap();
        let b = run_table(&cfg, &instances, &stencil, Depth::Full, false, Some(4)).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.instance_id, y.instance_id);
            assert_eq!((x.c1, x.c2), (y.c1, y.c2));
            assert_eq!(x.alpha.map(f64::to_bits), y.alpha.map(f64::to_bits));
            assert_eq!(x.min_mean.map(f64::to_bits), y.min_mean.map(f64::to_bits));
            assert_eq!(x.class_count, y.class_count);
        }
    }

    #[test]
    fn perturb_instances_are_reproducible_and_need_a_seed() {
        let cfg = parse_config(
            "[grid]\nn = 8\n\n[stencil]\nradius = 1\n\n[experiment]\nepsilon = 0.05\ntrials = 2\nseed = 11\n",
        )
        .unwrap();
        let (grid, _) = build_geometry(&cfg).unwrap();
        let a = build_trial_instances(&cfg, grid).unwrap();
        let b = build_trial_instances(&cfg, grid).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[0].id, "t000");
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.metric.f_values(), y.metric.f_values());
        }

        let bare = parse_config("[grid]\nn = 8\n\n[stencil]\nradius = 1\n").unwrap();
        let err = build_trial_instances(&bare, grid).unwrap_err();
        assert!(err.to_string().contains("experiment"), "{err}");
    }
}
