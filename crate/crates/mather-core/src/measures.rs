//! Minimizing measures as optimal cycles of the timed action graph.
//!
//! Once α(c) is known, each edge gets the traversal time that puts it on the
//! energy shell E = α: for a moving edge, h_e = ℓ_f(e)/√(2α) minimizes
//! h·[½ m_e² |Δx_e/h|² + α], and at that time the edge's kinetic energy is
//! ½ (ℓ_f(e)/h_e)² = α *exactly*. Rest edges keep a nominal dwell time (one
//! grid spacing). The timed cost of an edge is the deformed action
//!
//! ```text
//! cost_e = ½ m_e² |Δx_e|² / h_e − ⟨c, Δx_e⟩,
//! ```
//!
//! and the object of interest is the minimum cycle mean Σcost/Σh: closed
//! orbits of minimal average deformed action. Duality with the critical
//! value — min mean = −α up to the bisection slack — is a consequence of
//! using one edge factor m_e everywhere, and is asserted, not assumed, by
//! the test suites.
//!
//! Cycle statistics are always folded in one canonical order (cycle rotated
//! to its smallest tail node, edges summed in traversal order, one final
//! division). The exhaustive oracle uses the same fold, so agreement between
//! the production solver and brute-force enumeration is exact, not
//! approximate.
//!
//! Minimizer enumeration works on the *tight subgraph*: with potentials π at
//! the optimal mean, the reduced cost of every edge is nonnegative, optimal
//! cycles run through edges whose reduced round-trip cost vanishes, and the
//! strongly connected components of those edges are the distinct minimizing
//! classes. Each component is summarized by re-solving min-mean restricted
//! to it, and converted to a closed occupation measure.

use alloc::vec;
use alloc::vec::Vec;

use crate::alpha::{self, ActionGraph};
use crate::grid::ScalarField;
use crate::math;
use crate::paths::{strongly_connected, DijkstraScratch};
use crate::{Error, Result};

/// How traversal times are attached to edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeAssignment {
    /// Free-time-optimal: moving edges ride the energy shell E = alpha,
    /// rest edges dwell one grid spacing.
    EnergyLevel { alpha: f64 },
    /// Every edge takes the same fixed time h.
    Uniform { h: f64 },
}

/// The action graph with per-edge times and timed costs attached.
#[derive(Debug, Clone)]
pub struct TimedActionGraph<'a> {
    graph: &'a ActionGraph,
    assignment: TimeAssignment,
    h: Vec<f64>,
    cost: Vec<f64>,
}

/// Attach traversal times to every edge of the graph.
///
/// `EnergyLevel { alpha }` requires alpha > 0: at zero energy a moving edge
/// would take infinite time ([`Error::DegenerateTime`]); the zero class is
/// handled by [`degenerate_zero_class_minimizers`] instead.
pub fn assign_times(g: &ActionGraph, assignment: TimeAssignment) -> Result<TimedActionGraph<'_>> {
    let e_count = g.edge_count();
    let mut h = Vec::with_capacity(e_count);
    let mut cost = Vec::with_capacity(e_count);
    match assignment {
        TimeAssignment::EnergyLevel { alpha } => {
            if !alpha.is_finite() {
                return Err(Error::NonFinite("energy level"));
            }
            if alpha < 0.0 {
                return Err(Error::NegativeLevel);
            }
            if alpha == 0.0 {
                return Err(Error::DegenerateTime);
            }
            let sqrt_2a = math::sqrt(2.0 * alpha);
            let dwell = g.grid().spacing();
            for e in 0..e_count {
                let ell = g.finsler_length(e);
                if ell == 0.0 {
                    h.push(dwell);
                    cost.push(0.0);
                } else {
                    // h = ℓ/√(2α); cost = ½ ℓ²/h − form = ½ √(2α) ℓ − form
                    h.push(ell / sqrt_2a);
                    cost.push(0.5 * sqrt_2a * ell - g.form_term(e));
                }
            }
        }
        TimeAssignment::Uniform { h: fixed } => {
            if !fixed.is_finite() {
                return Err(Error::NonFinite("uniform timestep"));
            }
            if fixed <= 0.0 {
                return Err(Error::DegenerateTime);
            }
            for e in 0..e_count {
                let ell = g.finsler_length(e);
                h.push(fixed);
                cost.push(0.5 * ell * ell / fixed - g.form_term(e));
            }
        }
    }
    Ok(TimedActionGraph {
        graph: g,
        assignment,
        h,
        cost,
    })
}

impl<'a> TimedActionGraph<'a> {
    pub fn graph(&self) -> &'a ActionGraph {
        self.graph
    }

    pub fn assignment(&self) -> TimeAssignment {
        self.assignment
    }

    #[inline]
    pub fn time(&self, e: usize) -> f64 {
        self.h[e]
    }

    #[inline]
    pub fn cost(&self, e: usize) -> f64 {
        self.cost[e]
    }

    /// Kinetic energy of an edge at its assigned time: ½ (ℓ_f/h)².
    /// Rest edges carry zero energy.
    pub fn edge_energy(&self, e: usize) -> f64 {
        let ell = self.graph.finsler_length(e);
        if ell == 0.0 {
            0.0
        } else {
            let speed = ell / self.h[e];
            0.5 * speed * speed
        }
    }
}

/// Cost, time and mean of a cycle, folded in canonical order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleStats {
    pub cost: f64,
    pub time: f64,
    pub mean: f64,
}

/// The one fold used for every cycle mean in the crate (and by the
/// exhaustive oracle): sum cost and time in traversal order of the
/// canonically rotated cycle, then divide once.
pub(crate) fn fold_stats(tg: &TimedActionGraph<'_>, edges: &[usize]) -> CycleStats {
    let mut cost = 0.0;
    let mut time = 0.0;
    for &e in edges {
        cost += tg.cost(e);
        time += tg.time(e);
    }
    CycleStats {
        cost,
        time,
        mean: cost / time,
    }
}

/// A closed edge cycle, stored in canonical rotation (smallest tail first).
#[derive(Debug, Clone, PartialEq)]
pub struct GraphCycle {
    edges: Vec<usize>,
}

impl GraphCycle {
    /// Validate closure (each edge's head is the next edge's tail, wrapping
    /// around) and canonicalize the rotation.
    pub fn new(g: &ActionGraph, mut edges: Vec<usize>) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::MalformedLoop("cycle has no edges"));
        }
        for &e in &edges {
            if e >= g.edge_count() {
                return Err(Error::MalformedLoop("edge id out of range"));
            }
        }
        for i in 0..edges.len() {
            let next = edges[(i + 1) % edges.len()];
            if g.head(edges[i]) != g.tail(next) {
                return Err(Error::MalformedLoop("edge chain does not close"));
            }
        }
        alpha::canonicalize_cycle(g, &mut edges);
        Ok(GraphCycle { edges })
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Integer homology class of the cycle (offsets must telescope to a
    /// multiple of n in each coordinate, which closure guarantees).
    pub fn homology(&self, g: &ActionGraph) -> (i64, i64) {
        let mut sx = 0i64;
        let mut sy = 0i64;
        for &e in &self.edges {
            let off = g.offset(e);
            sx += off.dx as i64;
            sy += off.dy as i64;
        }
        let n = g.grid().n() as i64;
        (sx / n, sy / n)
    }

    /// Canonical statistics under a time assignment.
    pub fn stats(&self, tg: &TimedActionGraph<'_>) -> CycleStats {
        fold_stats(tg, &self.edges)
    }

    /// Rotation vector ρ = z / T: homology per unit time.
    pub fn rotation_vector(&self, tg: &TimedActionGraph<'_>) -> (f64, f64) {
        let (z1, z2) = self.homology(tg.graph());
        let t = self.stats(tg).time;
        (z1 as f64 / t, z2 as f64 / t)
    }
}

/// Output of the min-mean solver.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMeanResult {
    /// The minimum cycle mean (canonical fold of `cycle`).
    pub mean: f64,
    /// An optimal cycle.
    pub cycle: GraphCycle,
    pub stats: CycleStats,
    /// Detector invocations spent (bisection plus exact refinement).
    pub iterations: u32,
}

/// Minimum mean cycle of the timed graph: bisection on λ over the negative-
/// cycle detector for cost − λ·h, then exact refinement — repeatedly jump λ
/// to the canonical mean of the incumbent and ask for a strictly better
/// cycle — so the reported value is a canonical fold, not a bisection
/// midpoint.
pub fn min_mean_cycle(tg: &TimedActionGraph<'_>) -> Result<MinMeanResult> {
    min_mean_masked(tg, None)
}

/// Min-mean restricted to edges whose endpoints both satisfy `mask` (None =
/// whole graph). Masked-out edges are priced prohibitively instead of being
/// removed, so the graph topology (and edge ids) stay put.
pub(crate) fn min_mean_masked(
    tg: &TimedActionGraph<'_>,
    mask: Option<&[bool]>,
) -> Result<MinMeanResult> {
    let g = tg.graph();
    let e_count = g.edge_count();
    const BLOCKED: f64 = 1e9;
    let allowed = |e: usize| -> bool {
        match mask {
            None => true,
            Some(m) => m[g.tail(e)] && m[g.head(e)],
        }
    };

    // Any cycle mean is an h-weighted average of per-edge cost/h ratios, so
    // the smallest ratio brackets below; the rest self-loop (cost 0) caps
    // above at 0.
    let mut lo = f64::INFINITY;
    for e in 0..e_count {
        if allowed(e) {
            let r = tg.cost(e) / tg.time(e);
            if r < lo {
                lo = r;
            }
        }
    }
    if !lo.is_finite() {
        return Err(Error::InvalidParameter("mask excludes every edge"));
    }
    let mut hi = 0.0f64;
    if lo > hi {
        // all ratios positive (possible under exotic masks): the self-loop
        // bound still applies if any rest edge is allowed; otherwise fall
        // back to the largest ratio.
        hi = lo;
        for e in 0..e_count {
            if allowed(e) {
                let r = tg.cost(e) / tg.time(e);
                if r > hi {
                    hi = r;
                }
            }
        }
    }

    let eps = g.default_cycle_eps();
    let mut iterations = 0u32;
    let mut incumbent: Option<Vec<usize>> = None;
    let tol = 1e-9 * lo.abs().max(1.0);
    while hi - lo > tol && iterations < 80 {
        let lambda = 0.5 * (lo + hi);
        iterations += 1;
        let found = alpha::negative_cycle(
            g,
            |e| {
                if allowed(e) {
                    tg.cost(e) - lambda * tg.time(e)
                } else {
                    BLOCKED
                }
            },
            eps,
        );
        match found {
            Some((edges, _)) => {
                hi = lambda;
                incumbent = Some(edges);
            }
            None => lo = lambda,
        }
    }

    // Fall back to the best rest loop when bisection never certified a
    // witness (the optimum is ≥ 0 − ε, e.g. for the zero class under
    // uniform times, where the rest loop itself is optimal).
    let mut best_edges = match incumbent {
        Some(edges) => edges,
        None => {
            let mut best: Option<(f64, usize)> = None;
            for e in 0..e_count {
                if allowed(e) && g.tail(e) == g.head(e) {
                    let r = tg.cost(e) / tg.time(e);
                    if best.map_or(true, |(br, _)| r < br) {
                        best = Some((r, e));
                    }
                }
            }
            match best {
                Some((_, e)) => vec![e],
                None => {
                    return Err(Error::InvalidParameter(
                        "no certified cycle and no admissible rest loop",
                    ))
                }
            }
        }
    };
    alpha::canonicalize_cycle(g, &mut best_edges);
    let mut best_stats = fold_stats(tg, &best_edges);

    // Exact refinement: at λ equal to the incumbent's canonical mean, any
    // strictly negative cycle has a strictly smaller mean. Replace and
    // repeat until no certified improvement remains; every accepted value is
    // a canonical fold.
    for _ in 0..200 {
        let lambda = best_stats.mean;
        iterations += 1;
        let found = alpha::negative_cycle(
            g,
            |e| {
                if allowed(e) {
                    tg.cost(e) - lambda * tg.time(e)
                } else {
                    BLOCKED
                }
            },
            0.0,
        );
        match found {
            Some((mut edges, _)) => {
                alpha::canonicalize_cycle(g, &mut edges);
                let stats = fold_stats(tg, &edges);
                if stats.mean < best_stats.mean {
                    best_edges = edges;
                    best_stats = stats;
                } else {
                    break;
                }
            }
            None => break,
        }
    }

    let cycle = GraphCycle::new(g, best_edges)?;
    let stats = cycle.stats(tg);
    Ok(MinMeanResult {
        mean: stats.mean,
        cycle,
        stats,
        iterations,
    })
}

/// Knobs for minimizer enumeration.
#[derive(Debug, Clone, Copy)]
pub struct EnumerationParams {
    /// Cap on stored representative cycles.
    pub max_count: usize,
    /// Relative half-width of the optimality cluster: edges within
    /// `cluster_rel · max(|mean|, 1e-3) · T₀` of tight participate.
    pub cluster_rel: f64,
}

impl Default for EnumerationParams {
    fn default() -> Self {
        EnumerationParams {
            max_count: 64,
            cluster_rel: 1e-6,
        }
    }
}

/// The distinct minimizing classes of a timed graph.
#[derive(Debug, Clone)]
pub struct MinimizerSet {
    /// The optimal mean all components share.
    pub optimal_value: f64,
    /// One representative optimal cycle per component (first `max_count`).
    pub cycles: Vec<GraphCycle>,
    /// Rotation vector of each stored representative.
    pub rotation_vectors: Vec<(f64, f64)>,
    /// True number of components found (may exceed `cycles.len()`).
    pub count_distinct: usize,
    /// Whether components beyond `max_count` were discarded.
    pub capped: bool,
    /// Set only by the zero-class fast path, where every grid point is a
    /// rest minimizer and "distinct cycles" degenerates to one per node.
    pub degenerate_zero_class: bool,
}

/// Enumerate the distinct minimizing cycle classes.
///
/// Pipeline: solve min-mean for the optimal value; build potentials π for
/// the reduced costs r(e) = cost − opt·h; call an edge *tight* when its
/// reduced round trip ŵ(e) + d̂(head → tail) stays within the cluster
/// tolerance; take strongly connected components of the tight subgraph
/// (size ≥ 2 — rest loops are never tight for a nonzero class); re-solve
/// min-mean inside each component for its representative.
pub fn enumerate_minimizers(
    tg: &TimedActionGraph<'_>,
    params: EnumerationParams,
) -> Result<MinimizerSet> {
    if params.max_count == 0 {
        return Err(Error::InvalidParameter("max_count must be positive"));
    }
    if !(params.cluster_rel > 0.0) || !params.cluster_rel.is_finite() {
        return Err(Error::InvalidParameter("cluster_rel must be positive"));
    }
    let g = tg.graph();
    let base = min_mean_cycle(tg)?;
    let opt = base.mean;
    let eps_tight = params.cluster_rel * opt.abs().max(1e-3) * base.stats.time;

    // Potentials for the reduced cost. At the optimum no cycle is negative
    // beyond rounding, so this converges; the certification threshold is the
    // cluster tolerance itself.
    let reduced = |e: usize| tg.cost(e) - opt * tg.time(e);
    let pi = alpha::potentials(g, reduced, eps_tight, opt)?;
    let what = |e: usize| -> f64 {
        let w = reduced(e) + pi[g.tail(e)] - pi[g.head(e)];
        if w < 0.0 {
            0.0
        } else {
            w
        }
    };

    // Tight edges: ŵ(e) plus the cheapest reduced way back closes a cycle
    // within tolerance. One pruned Dijkstra per head node covers all its
    // incoming edges.
    let v_count = g.node_count();
    let mut incoming: Vec<Vec<u32>> = vec![Vec::new(); v_count];
    for e in 0..g.edge_count() {
        if g.tail(e) != g.head(e) {
            incoming[g.head(e)].push(e as u32);
        }
    }
    let mut scratch = DijkstraScratch::new(v_count);
    let mut tight = vec![false; g.edge_count()];
    let mut incident = vec![false; v_count];
    for x in 0..v_count {
        if incoming[x].is_empty() {
            continue;
        }
        // cheapest incoming ŵ bounds what the return path may cost
        let mut min_in = f64::INFINITY;
        for &e in &incoming[x] {
            let w = what(e as usize);
            if w < min_in {
                min_in = w;
            }
        }
        if min_in > eps_tight {
            continue;
        }
        scratch.run(g, &what, x, eps_tight);
        for &e in &incoming[x] {
            let e = e as usize;
            let back = scratch.dist(g.tail(e));
            if back.is_finite() && what(e) + back <= eps_tight {
                tight[e] = true;
                incident[g.tail(e)] = true;
                incident[g.head(e)] = true;
            }
        }
    }

    // Compact the incident nodes and run Tarjan on the tight subgraph.
    let mut compact = vec![u32::MAX; v_count];
    let mut nodes: Vec<u32> = Vec::new();
    for x in 0..v_count {
        if incident[x] {
            compact[x] = nodes.len() as u32;
            nodes.push(x as u32);
        }
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for e in 0..g.edge_count() {
        if tight[e] {
            adj[compact[g.tail(e)] as usize].push(compact[g.head(e)] as usize);
        }
    }
    let comps = strongly_connected(&adj);

    let mut kept: Vec<Vec<bool>> = Vec::new();
    let mut count_distinct = 0usize;
    for comp in &comps {
        if comp.len() < 2 {
            continue; // a lone node cannot close a moving cycle
        }
        count_distinct += 1;
        if kept.len() < params.max_count {
            let mut mask = vec![false; v_count];
            for &ci in comp {
                mask[nodes[ci] as usize] = true;
            }
            kept.push(mask);
        }
    }

    let mut cycles = Vec::with_capacity(kept.len());
    let mut rotation_vectors = Vec::with_capacity(kept.len());
    for mask in &kept {
        let local = min_mean_masked(tg, Some(mask))?;
        rotation_vectors.push(local.cycle.rotation_vector(tg));
        cycles.push(local.cycle);
    }

    Ok(MinimizerSet {
        optimal_value: opt,
        cycles,
        rotation_vectors,
        count_distinct,
        capped: count_distinct > params.max_count,
        degenerate_zero_class: false,
    })
}

/// The zero class needs no timed graph: w₀ ≡ 0, every grid point supports a
/// rest Dirac measure of zero action, and "distinct minimizers" collapses to
/// one per node. Stored cycles are the rest loops of the first `max_count`
/// nodes.
pub fn degenerate_zero_class_minimizers(
    g: &ActionGraph,
    max_count: usize,
) -> Result<MinimizerSet> {
    if max_count == 0 {
        return Err(Error::InvalidParameter("max_count must be positive"));
    }
    let rest = g
        .stencil()
        .offsets()
        .iter()
        .position(|o| o.dx == 0 && o.dy == 0)
        .ok_or(Error::InvalidParameter("stencil lacks a rest offset"))?;
    let v = g.node_count();
    let stored = v.min(max_count);
    let mut cycles = Vec::with_capacity(stored);
    for node in 0..stored {
        cycles.push(GraphCycle::new(g, vec![g.edge_id(node, rest)])?);
    }
    Ok(MinimizerSet {
        optimal_value: 0.0,
        rotation_vectors: vec![(0.0, 0.0); stored],
        cycles,
        count_distinct: v,
        capped: v > max_count,
        degenerate_zero_class: true,
    })
}

/// One weighted edge of an occupation measure. The atom carries everything
/// pairings and energy checks need, so a measure outlives its graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureAtom {
    pub edge: usize,
    /// Tail node index (row-major).
    pub tail: usize,
    pub head: usize,
    /// Crossing rate: the measure of the edge per unit time is rate · h.
    pub rate: f64,
    /// Traversal time.
    pub h: f64,
    /// Flat speed squared |Δx/h|².
    pub speed_sq: f64,
    /// Conformal factor m_e² (the discrete e^{f} along the edge).
    pub msq: f64,
}

/// A discrete holonomic probability measure: nonnegative crossing rates on
/// edges, stationary at every node, with unit total time mass Σ rate·h.
#[derive(Debug, Clone)]
pub struct OccupationMeasure {
    grid_n: usize,
    atoms: Vec<MeasureAtom>,
}

impl OccupationMeasure {
    /// Validate and wrap a set of atoms: finite nonnegative rates, positive
    /// times, per-node flux balance within 1e-12, total mass within 1e-12
    /// of 1.
    pub fn from_atoms(grid_n: usize, atoms: Vec<MeasureAtom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("measure has no atoms"));
        }
        let v = grid_n * grid_n;
        let mut flux = vec![0.0f64; v];
        let mut mass = 0.0;
        for a in &atoms {
            if !(a.rate >= 0.0) || !a.rate.is_finite() {
                return Err(Error::InvalidParameter("atom rate must be ≥ 0 and finite"));
            }
            if !(a.h > 0.0) || !a.h.is_finite() {
                return Err(Error::DegenerateTime);
            }
            if a.tail >= v || a.head >= v {
                return Err(Error::GridMismatch);
            }
            flux[a.tail] += a.rate;
            flux[a.head] -= a.rate;
            mass += a.rate * a.h;
        }
        for &fx in &flux {
            if fx.abs() > 1e-12 {
                return Err(Error::InvalidParameter("measure is not closed (node flux imbalance)"));
            }
        }
        if (mass - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter("measure mass differs from 1"));
        }
        Ok(OccupationMeasure { grid_n, atoms })
    }

    pub fn atoms(&self) -> &[MeasureAtom] {
        &self.atoms
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    /// Σ rate·h (1 up to validation tolerance).
    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.rate * a.h).sum()
    }

    /// Time mass projected to a node: Σ over atoms with this tail.
    pub fn node_mass(&self, node: usize) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.tail == node)
            .map(|a| a.rate * a.h)
            .sum()
    }

    /// Time-averaged kinetic energy ∫ ½ e^f |v|² dμ, from the atoms alone.
    pub fn average_kinetic(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.rate * a.h * 0.5 * a.msq * a.speed_sq)
            .sum()
    }
}

/// Turn an optimal cycle into its normalized occupation measure: every edge
/// is crossed once per period T, so rate = 1/T with T the canonical time.
pub fn cycle_to_measure(tg: &TimedActionGraph<'_>, cycle: &GraphCycle) -> Result<OccupationMeasure> {
    let g = tg.graph();
    let stats = cycle.stats(tg);
    if !(stats.time > 0.0) {
        return Err(Error::DegenerateTime);
    }
    let rate = 1.0 / stats.time;
    let mut atoms = Vec::with_capacity(cycle.len());
    for &e in cycle.edges() {
        let h = tg.time(e);
        let flat = g.flat_norm(e);
        let speed = flat / h;
        let m = g.conformal_mean(e);
        atoms.push(MeasureAtom {
            edge: e,
            tail: g.tail(e),
            head: g.head(e),
            rate,
            h,
            speed_sq: speed * speed,
            msq: m * m,
        });
    }
    OccupationMeasure::from_atoms(g.grid().n(), atoms)
}

/// Verify that a measure's support sits on the energy shell E = alpha:
/// returns the per-atom deviations |½ msq·speed_sq − alpha| and their max.
/// Rest atoms carry energy 0 and are reported honestly (deviation alpha).
pub fn support_energy_check(mu: &OccupationMeasure, alpha: f64) -> (f64, Vec<f64>) {
    let mut devs = Vec::with_capacity(mu.atoms().len());
    let mut worst = 0.0f64;
    for a in mu.atoms() {
        let energy = 0.5 * a.msq * a.speed_sq;
        let d = (energy - alpha).abs();
        if d > worst {
            worst = d;
        }
        devs.push(d);
    }
    (worst, devs)
}

/// A witness that two measures are distinguished by a position observable.
#[derive(Debug, Clone)]
pub struct SeparationCertificate {
    /// Indicator of the separating region (grid sampling of a smooth bump
    /// package supported in the cells where μ outweighs ν).
    pub u: ScalarField,
    /// ⟨u·|v|², μ − ν⟩ — the observable gap.
    pub gap: f64,
    /// Time mass of μ − ν inside the region.
    pub mass_gap: f64,
}

/// Build a test function separating two occupation measures.
///
/// Projects both measures to node masses, takes the region where the
/// difference is positive (sided so the largest deviation is inside), and
/// pairs its indicator against both measures with the kinetic weight |v|².
/// Fails with [`Error::IdenticalMeasures`] when the projections are
/// indistinguishable (< 1e-12 everywhere) and with
/// [`Error::ZeroVelocitySupport`] when either measure has no moving atom to
/// pair against.
pub fn separation_test(
    mu: &OccupationMeasure,
    nu: &OccupationMeasure,
) -> Result<SeparationCertificate> {
    if mu.grid_n() != nu.grid_n() {
        return Err(Error::GridMismatch);
    }
    let n = mu.grid_n();
    let grid = crate::grid::TorusGrid::new(n)?;
    let v = n * n;
    if mu.atoms().iter().all(|a| a.speed_sq == 0.0)
        || nu.atoms().iter().all(|a| a.speed_sq == 0.0)
    {
        return Err(Error::ZeroVelocitySupport);
    }

    let mut diff = vec![0.0f64; v];
    for a in mu.atoms() {
        diff[a.tail] += a.rate * a.h;
    }
    for a in nu.atoms() {
        diff[a.tail] -= a.rate * a.h;
    }

    let mut peak = 0usize;
    for x in 1..v {
        if diff[x].abs() > diff[peak].abs() {
            peak = x;
        }
    }
    if diff[peak].abs() <= 1e-12 {
        return Err(Error::IdenticalMeasures);
    }
    let side = if diff[peak] > 0.0 { 1.0 } else { -1.0 };

    let mut values = vec![0.0f64; v];
    let mut mass_gap = 0.0;
    for x in 0..v {
        if side * diff[x] > 0.0 {
            values[x] = 1.0;
            mass_gap += side * diff[x];
        }
    }
    let u = ScalarField::new(grid, values)?;
    let gap = crate::action::pairing(&u, mu)? - crate::action::pairing(&u, nu)?;
    Ok(SeparationCertificate {
        u,
        gap: side * gap,
        mass_gap,
    })
}
