//! Brute-force oracles for small graphs.
//!
//! Everything in this module recomputes a quantity the production solvers
//! obtain by smarter means, using nothing but enumeration and dense matrix
//! algebra. The point is independence: these routines share no search
//! machinery with [`crate::alpha`] or [`crate::measures`] — only the
//! canonical cycle fold, deliberately, so that value comparisons are exact
//! rather than within-epsilon.
//!
//! Costs are exponential or cubic in the node count; keep instances tiny
//! (n ≤ 4 with a radius-1 stencil is comfortable).

use alloc::vec;
use alloc::vec::Vec;

use crate::alpha::{self, ActionGraph};
use crate::math;
use crate::measures::{fold_stats, CycleStats, TimedActionGraph};
use crate::{Error, Result};

/// Hard cap on enumerated cycles; exceeding it is an oracle-integrity error
/// (the instance was too large for brute force to mean anything).
const CYCLE_CAP: usize = 4_000_000;

/// All node-simple directed cycles, each canonically rotated, in a
/// deterministic order (anchored at their smallest node, depth-first by
/// ascending edge id). Includes single-edge rest loops.
pub fn simple_cycles(g: &ActionGraph) -> Result<Vec<Vec<usize>>> {
    let v = g.node_count();
    let s = g.stencil().len();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut on_path = vec![false; v];
    let mut path: Vec<usize> = Vec::new();

    // anchored DFS: cycles whose smallest node is `anchor` visit only
    // nodes ≥ anchor and close back at the anchor
    fn dfs(
        g: &ActionGraph,
        s: usize,
        anchor: usize,
        u: usize,
        on_path: &mut [bool],
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<()> {
        let base = u * s;
        for j in 0..s {
            let e = base + j;
            let h = g.head(e);
            if h == anchor {
                // the edge closes the cycle (a lone self-loop when the path
                // is still empty)
                let mut cycle = path.clone();
                cycle.push(e);
                alpha::canonicalize_cycle(g, &mut cycle);
                out.push(cycle);
                if out.len() > CYCLE_CAP {
                    return Err(Error::InvalidParameter(
                        "instance too large for exhaustive cycle enumeration",
                    ));
                }
            } else if h > anchor && !on_path[h] {
                on_path[h] = true;
                path.push(e);
                dfs(g, s, anchor, h, on_path, path, out)?;
                path.pop();
                on_path[h] = false;
            }
        }
        Ok(())
    }

    for anchor in 0..v {
        on_path[anchor] = true;
        dfs(g, s, anchor, anchor, &mut on_path, &mut path, &mut out)?;
        on_path[anchor] = false;
    }
    Ok(out)
}

/// Minimum cycle mean by enumerating every simple cycle and folding each
/// with the shared canonical arithmetic. Returns the optimal value and the
/// first cycle attaining it in enumeration order.
pub fn min_mean_exhaustive(tg: &TimedActionGraph<'_>) -> Result<(CycleStats, Vec<usize>)> {
    let cycles = simple_cycles(tg.graph())?;
    let mut best: Option<(CycleStats, Vec<usize>)> = None;
    for cy in cycles {
        let stats = fold_stats(tg, &cy);
        match &best {
            Some((bs, _)) if bs.mean <= stats.mean => {}
            _ => best = Some((stats, cy)),
        }
    }
    best.ok_or(Error::InvalidParameter("graph has no cycles"))
}

/// The most negative total w_k-weight over all simple cycles, with its
/// cycle. The production detector claims "some cycle < −ε" — this oracle
/// settles whether one exists at all.
pub fn negative_cycle_exhaustive(g: &ActionGraph, k: f64) -> Result<(f64, Vec<usize>)> {
    if !k.is_finite() {
        return Err(Error::NonFinite("level k"));
    }
    if k < 0.0 {
        return Err(Error::NegativeLevel);
    }
    let sqrt_2k = math::sqrt(2.0 * k);
    let cycles = simple_cycles(g)?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    for cy in cycles {
        let cost = cy
            .iter()
            .fold(0.0, |acc, &e| acc + g.weight_with_sqrt(e, sqrt_2k));
        match &best {
            Some((bc, _)) if *bc <= cost => {}
            _ => best = Some((cost, cy)),
        }
    }
    best.ok_or(Error::InvalidParameter("graph has no cycles"))
}

/// Nodes lying on some *moving* simple cycle whose canonical mean is within
/// `tol` of `opt` — the brute-force version of both the minimizer supports
/// and the Aubry membership test.
pub fn zero_cycle_nodes(tg: &TimedActionGraph<'_>, opt: f64, tol: f64) -> Result<Vec<usize>> {
    let g = tg.graph();
    let cycles = simple_cycles(g)?;
    let mut hit = vec![false; g.node_count()];
    for cy in cycles {
        if cy.len() == 1 && g.tail(cy[0]) == g.head(cy[0]) {
            continue;
        }
        let stats = fold_stats(tg, &cy);
        if (stats.mean - opt).abs() <= tol {
            for &e in &cy {
                hit[g.tail(e)] = true;
            }
        }
    }
    Ok((0..g.node_count()).filter(|&x| hit[x]).collect())
}

/// All-pairs shortest w_k-path weights by min-plus matrix squaring (paths of
/// any hop count ≤ V, empty path allowed on the diagonal). O(V³ log V) —
/// the independent cross-check for [`crate::aubry::mane_potential`].
pub fn apsp_minplus(g: &ActionGraph, k: f64) -> Result<Vec<f64>> {
    if !k.is_finite() {
        return Err(Error::NonFinite("level k"));
    }
    if k < 0.0 {
        return Err(Error::NegativeLevel);
    }
    let v = g.node_count();
    let sqrt_2k = math::sqrt(2.0 * k);
    let mut d = vec![f64::INFINITY; v * v];
    for i in 0..v {
        d[i * v + i] = 0.0;
    }
    for e in 0..g.edge_count() {
        let w = g.weight_with_sqrt(e, sqrt_2k);
        let slot = &mut d[g.tail(e) * v + g.head(e)];
        if w < *slot {
            *slot = w;
        }
    }
    // square ⌈log₂ V⌉ times: after t squarings, paths of up to 2^t hops
    let mut hops = 1usize;
    let mut next = vec![0.0f64; v * v];
    while hops < v {
        for i in 0..v {
            for j in 0..v {
                let mut best = d[i * v + j];
                for m in 0..v {
                    let cand = d[i * v + m] + d[m * v + j];
                    if cand < best {
                        best = cand;
                    }
                }
                next[i * v + j] = best;
            }
        }
        core::mem::swap(&mut d, &mut next);
        hops *= 2;
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_metric, CohomologyClass, MetricSpec, TorusGrid, VelocityStencil};
    use crate::measures::{assign_times, TimeAssignment};

    fn flat_graph(n: usize, radius: i32, c: (f64, f64)) -> ActionGraph {
        let grid = TorusGrid::new(n).unwrap();
        let metric = build_metric(&MetricSpec::Flat, grid).unwrap();
        let stencil = VelocityStencil::disc(radius).unwrap();
        ActionGraph::build(&metric, &stencil, CohomologyClass::new(c.0, c.1)).unwrap()
    }

    #[test]
    fn tiny_torus_cycle_census_is_stable() {
        // n = 2, radius 1: offsets (±1,0) and (0,±1) coincide pairwise mod 2,
        // so each node has a rest loop, two parallel horizontal edges and two
        // parallel vertical edges. The census is small and fully checkable:
        // enumeration must be deterministic and every cycle must close.
        let g = flat_graph(2, 1, (1.0, 0.0));
        let cycles = simple_cycles(&g).unwrap();
        let again = simple_cycles(&g).unwrap();
        assert_eq!(cycles, again);
        assert_eq!(cycles.iter().filter(|c| c.len() == 1).count(), 4); // rest loops
        for cy in &cycles {
            for (i, &e) in cy.iter().enumerate() {
                let next = cy[(i + 1) % cy.len()];
                assert_eq!(g.head(e), g.tail(next));
            }
        }
    }

    #[test]
    fn exhaustive_and_production_min_mean_agree_bitwise() {
        let g = flat_graph(4, 1, (1.0, 0.0));
        let tg = assign_times(&g, TimeAssignment::EnergyLevel { alpha: 0.5 }).unwrap();
        let (oracle, _) = min_mean_exhaustive(&tg).unwrap();
        let fast = crate::measures::min_mean_cycle(&tg).unwrap();
        assert_eq!(oracle.mean.to_bits(), fast.mean.to_bits());
        assert_eq!(oracle.mean, -0.5);
    }

    #[test]
    fn exhaustive_settles_the_detector_both_ways() {
        let g = flat_graph(4, 1, (1.0, 0.0));
        let eps = g.default_cycle_eps();
        // subcritical: both must find negativity
        let (worst, _) = negative_cycle_exhaustive(&g, 0.125).unwrap();
        let det = alpha::has_negative_cycle(&g, 0.125, eps).unwrap();
        assert!(worst < -eps);
        assert!(det.is_some());
        // supercritical: both must come up clean
        let (worst, _) = negative_cycle_exhaustive(&g, 0.5 + 1e-6).unwrap();
        let det = alpha::has_negative_cycle(&g, 0.5 + 1e-6, eps).unwrap();
        assert!(worst >= -eps);
        assert!(det.is_none());
    }

    #[test]
    fn minplus_closure_matches_bellman_ford() {
        let grid = TorusGrid::new(4).unwrap();
        let spec = MetricSpec::Fourier(alloc::vec![crate::grid::FourierMode {
            mx: 1,
            my: 0,
            amplitude: 0.08,
            phase: 0.5,
        }]);
        let metric = build_metric(&spec, grid).unwrap();
        let stencil = VelocityStencil::disc(1).unwrap();
        let g = ActionGraph::build(&metric, &stencil, CohomologyClass::new(1.0, 0.0)).unwrap();
        let k = 0.7; // clearly supercritical for this mild metric
        let apsp = apsp_minplus(&g, k).unwrap();
        let field = crate::aubry::mane_potential(&g, k, &[0, 5, 11]).unwrap();
        let v = g.node_count();
        for (row, &seed) in [0usize, 5, 11].iter().enumerate() {
            for x in 0..v {
                let a = apsp[seed * v + x];
                let b = field.phi[row * v + x];
                assert!(
                    (a - b).abs() <= 1e-12,
                    "seed {seed} node {x}: closure {a} vs bellman-ford {b}"
                );
            }
        }
    }
}
