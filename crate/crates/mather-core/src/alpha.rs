//! Critical values by negative-cycle certification.
//!
//! The Maupertuis/Mañé reduction: for a level k ≥ 0, the free-time action of
//! an edge e under L − c + k is
//!
//! ```text
//! w_k(e) = √(2k) · ℓ_f(e) − ⟨c, Δx_e⟩,      ℓ_f(e) = m_e · |Δx_e|,
//! ```
//!
//! where m_e is the trapezoidal mean of e^{f/2} at the edge's endpoints
//! (the infimum over traversal times h of h·[½ m_e² |Δx/h|² + k] is attained
//! at h = |Δx| m_e / √(2k) and equals w_k(e) + ⟨c, Δx_e⟩). The discrete
//! critical value α(c) is the smallest k at which no cycle of the action
//! graph has negative total w_k-weight. Below it, negative cycles certify
//! unboundedness of the deformed action; above it, weights are a Finsler
//! length minus an exact form and shortest paths exist.
//!
//! One convention matters enough to repeat: the *same* edge factor m_e feeds
//! the Finsler lengths here, the time assignment and costs of the timed graph
//! in [`crate::measures`], and the per-edge energies. That single choice is
//! what makes the min-mean/critical-value duality an algebraic identity
//! instead of an O(Δf²) approximation.
//!
//! Detection is Bellman–Ford from the all-zero potential (every node a
//! source) with early termination, periodic predecessor-graph scans, and
//! explicit certification: a cycle counts as negative only if its re-summed
//! weight is below −ε_cycle. The bisection for α brackets with certified
//! endpoints and reports the bracket alongside the midpoint.

use alloc::vec;
use alloc::vec::Vec;

use crate::action::{optimal_speed, SpeedProfile};
use crate::grid::{
    homology_class, CohomologyClass, ConformalMetric, DiscreteLoop, Node, Offset, TorusGrid,
    VelocityStencil,
};
use crate::math;
use crate::{Error, Result};

const NO_PRED: u32 = u32::MAX;

/// The weighted digraph of one (metric, class) pair: nodes are grid points,
/// edges are stencil steps. Edge e = node·S + j takes node to node + offset_j.
///
/// Everything the weight formulas need is precomputed per edge: the Finsler
/// length ℓ_f(e), the one-form term ⟨c, Δx_e⟩, the conformal mean m_e and the
/// head node.
#[derive(Debug, Clone)]
pub struct ActionGraph {
    grid: TorusGrid,
    stencil: VelocityStencil,
    class: CohomologyClass,
    metric: ConformalMetric,
    ell: Vec<f64>,
    form: Vec<f64>,
    m: Vec<f64>,
    head: Vec<u32>,
}

impl ActionGraph {
    /// Assemble the graph for a metric, stencil and cohomology class.
    pub fn build(
        metric: &ConformalMetric,
        stencil: &VelocityStencil,
        class: CohomologyClass,
    ) -> Result<Self> {
        if !class.c1.is_finite() || !class.c2.is_finite() {
            return Err(Error::NonFinite("cohomology class"));
        }
        let grid = metric.grid();
        let v = grid.node_count();
        let s = stencil.len();
        let n = grid.n() as f64;

        // per-offset geometry
        let mut off_norm = Vec::with_capacity(s);
        let mut off_form = Vec::with_capacity(s);
        for off in stencil.offsets() {
            let dx = off.dx as f64 / n;
            let dy = off.dy as f64 / n;
            off_norm.push(math::norm2(dx, dy));
            off_form.push(class.pair((dx, dy)));
        }

        let ef_half = metric.ef_half_values();
        let mut ell = Vec::with_capacity(v * s);
        let mut form = Vec::with_capacity(v * s);
        let mut m = Vec::with_capacity(v * s);
        let mut head = Vec::with_capacity(v * s);
        for node_idx in 0..v {
            let node = grid.node(node_idx);
            let mu = ef_half[node_idx];
            for (j, off) in stencil.offsets().iter().enumerate() {
                let h = grid.index(grid.step(node, *off));
                let me = 0.5 * (mu + ef_half[h]);
                m.push(me);
                ell.push(me * off_norm[j]);
                form.push(off_form[j]);
                head.push(h as u32);
            }
        }
        Ok(ActionGraph {
            grid,
            stencil: stencil.clone(),
            class,
            metric: metric.clone(),
            ell,
            form,
            m,
            head,
        })
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn stencil(&self) -> &VelocityStencil {
        &self.stencil
    }

    pub fn class(&self) -> CohomologyClass {
        self.class
    }

    pub fn metric(&self) -> &ConformalMetric {
        &self.metric
    }

    pub fn node_count(&self) -> usize {
        self.grid.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.ell.len()
    }

    #[inline]
    pub fn tail(&self, e: usize) -> usize {
        e / self.stencil.len()
    }

    #[inline]
    pub fn head(&self, e: usize) -> usize {
        self.head[e] as usize
    }

    #[inline]
    pub fn offset(&self, e: usize) -> Offset {
        self.stencil.offsets()[e % self.stencil.len()]
    }

    /// Finsler length ℓ_f(e) = m_e |Δx_e|.
    #[inline]
    pub fn finsler_length(&self, e: usize) -> f64 {
        self.ell[e]
    }

    /// ⟨c, Δx_e⟩.
    #[inline]
    pub fn form_term(&self, e: usize) -> f64 {
        self.form[e]
    }

    /// The edge conformal mean m_e (trapezoidal mean of e^{f/2}).
    #[inline]
    pub fn conformal_mean(&self, e: usize) -> f64 {
        self.m[e]
    }

    /// Flat length |Δx_e| of the edge displacement.
    #[inline]
    pub fn flat_norm(&self, e: usize) -> f64 {
        let me = self.m[e];
        if me == 0.0 {
            0.0
        } else {
            self.ell[e] / me
        }
    }

    /// w_k(e) for a precomputed √(2k).
    #[inline]
    pub fn weight_with_sqrt(&self, e: usize, sqrt_2k: f64) -> f64 {
        sqrt_2k * self.ell[e] - self.form[e]
    }

    /// The identifier of the edge from `node` along stencil offset `j`.
    pub fn edge_id(&self, node: usize, j: usize) -> usize {
        node * self.stencil.len() + j
    }

    /// Default certification threshold: ε_cycle = 1e-12 · (edge count).
    pub fn default_cycle_eps(&self) -> f64 {
        1e-12 * self.edge_count() as f64
    }

    /// Total w_k-weight of an edge cycle, summed in the given order.
    pub fn cycle_cost(&self, edges: &[usize], k: f64) -> f64 {
        let sqrt_2k = math::sqrt(2.0 * k);
        edges
            .iter()
            .fold(0.0, |acc, &e| acc + self.weight_with_sqrt(e, sqrt_2k))
    }
}

/// Rotate an edge cycle so it starts at its smallest tail node. Fixing the
/// summation origin makes re-certified costs reproducible.
pub(crate) fn canonicalize_cycle(g: &ActionGraph, edges: &mut Vec<usize>) {
    if edges.is_empty() {
        return;
    }
    let mut best = 0;
    for (i, &e) in edges.iter().enumerate() {
        if g.tail(e) < g.tail(edges[best]) {
            best = i;
        }
    }
    edges.rotate_left(best);
}

/// A certified negative cycle: its edges (canonically rotated), the level it
/// was found at and its re-summed cost there.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeCycleWitness {
    pub edges: Vec<usize>,
    pub level: f64,
    pub cost: f64,
}

impl NegativeCycleWitness {
    /// The witness as a discrete loop (nominal timestep: grid spacing).
    pub fn to_loop(&self, g: &ActionGraph) -> DiscreteLoop {
        let nodes: Vec<Node> = self.edges.iter().map(|&e| g.grid().node(g.tail(e))).collect();
        let displacements: Vec<Offset> = self.edges.iter().map(|&e| g.offset(e)).collect();
        DiscreteLoop {
            nodes,
            displacements,
            timestep: g.grid().spacing(),
        }
    }
}

/// Bellman–Ford negative-cycle search under an arbitrary edge weighting.
///
/// Starts from the all-zero potential (every node a source), relaxes in a
/// fixed order, and every `n` rounds walks the predecessor graph from a few
/// recently-updated nodes; a cycle is reported only when its re-summed
/// weight is strictly below −eps. Returns the canonically rotated edge list
/// and certified cost of the best cycle found, or None if relaxation
/// stabilizes (or no candidate certifies).
pub(crate) fn negative_cycle<W: Fn(usize) -> f64>(
    g: &ActionGraph,
    weight: W,
    eps: f64,
) -> Option<(Vec<usize>, f64)> {
    let v = g.node_count();
    let s = g.stencil.len();
    let mut dist = vec![0.0f64; v];
    let mut pred = vec![NO_PRED; v];
    let mut updated: Vec<u32> = Vec::new();
    let check_interval = g.grid.n().max(32);
    let mut visit_stamp = vec![0u32; v];
    let mut stamp = 0u32;

    let certify = |pred: &[u32], seeds: &[u32], stamp: &mut u32, visit: &mut [u32]| {
        let mut best: Option<(Vec<usize>, f64)> = None;
        for &seed in seeds {
            if let Some(mut edges) = pred_cycle(g, pred, seed as usize, stamp, visit) {
                canonicalize_cycle(g, &mut edges);
                let cost = edges.iter().fold(0.0, |acc, &e| acc + weight(e));
                if cost < -eps && best.as_ref().map_or(true, |(_, c)| cost < *c) {
                    best = Some((edges, cost));
                }
            }
        }
        best
    };

    for round in 0..v {
        let mut changed = false;
        updated.clear();
        for u in 0..v {
            let du = dist[u];
            let base = u * s;
            for j in 0..s {
                let e = base + j;
                let cand = du + weight(e);
                let h = g.head[e] as usize;
                if cand < dist[h] {
                    dist[h] = cand;
                    pred[h] = e as u32;
                    changed = true;
                    if updated.len() < 1024 {
                        updated.push(h as u32);
                    }
                }
            }
        }
        if !changed {
            return None;
        }
        let last_round = round + 1 == v;
        if last_round || (round + 1) % check_interval == 0 {
            // A handful of spread-out candidates suffices mid-run; sweep the
            // whole collected list only on the final round.
            let seeds: Vec<u32> = if last_round {
                updated.clone()
            } else {
                let step = (updated.len() / 8).max(1);
                updated.iter().step_by(step).copied().collect()
            };
            if let Some(hit) = certify(&pred, &seeds, &mut stamp, &mut visit_stamp) {
                return Some(hit);
            }
            if last_round {
                return None;
            }
        }
    }
    None
}

/// Walk the predecessor graph from `start` until a cycle closes; return its
/// edges in traversal order, or None if the chain dies out first.
fn pred_cycle(
    g: &ActionGraph,
    pred: &[u32],
    start: usize,
    stamp: &mut u32,
    visit: &mut [u32],
) -> Option<Vec<usize>> {
    let v = pred.len();
    // Phase 1: advance far enough to be inside a cycle, if one is reachable.
    let mut cur = start;
    for _ in 0..=v {
        let e = pred[cur];
        if e == NO_PRED {
            return None;
        }
        cur = g.tail(e as usize);
    }
    // Phase 2: mark until revisit to locate the cycle entry point.
    *stamp += 1;
    let marker = *stamp;
    let mut probe = cur;
    while visit[probe] != marker {
        visit[probe] = marker;
        probe = g.tail(pred[probe] as usize);
    }
    // Phase 3: collect the cycle's edges (walking predecessors goes against
    // the edge direction, so reverse at the end).
    let anchor = probe;
    let mut edges = Vec::new();
    let mut cur = anchor;
    loop {
        let e = pred[cur] as usize;
        edges.push(e);
        cur = g.tail(e);
        if cur == anchor {
            break;
        }
        if edges.len() > v {
            return None; // corrupt chain; refuse rather than loop forever
        }
    }
    edges.reverse();
    Some(edges)
}

/// All-source Bellman–Ford potentials π(v) = min over paths into v of the
/// path weight (0 at worst). At super-critical levels this converges and the
/// reduced weights w(e) + π(tail) − π(head) are nonnegative up to rounding.
///
/// Errors with [`Error::NeedsLargerAlpha`] when a certified negative cycle
/// prevents convergence.
pub(crate) fn potentials<W: Fn(usize) -> f64>(
    g: &ActionGraph,
    weight: W,
    eps: f64,
    level_for_error: f64,
) -> Result<Vec<f64>> {
    let v = g.node_count();
    let s = g.stencil.len();
    let mut dist = vec![0.0f64; v];
    let mut pred = vec![NO_PRED; v];
    for round in 0..v {
        let mut changed = false;
        for u in 0..v {
            let du = dist[u];
            let base = u * s;
            for j in 0..s {
                let e = base + j;
                let cand = du + weight(e);
                let h = g.head[e] as usize;
                if cand < dist[h] {
                    dist[h] = cand;
                    pred[h] = e as u32;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(dist);
        }
        if round + 1 == v {
            // Still moving after v rounds: either a genuine negative cycle or
            // last-ulp noise around zero-cost cycles. Certify before failing.
            let mut stamp = 0u32;
            let mut visit = vec![0u32; v];
            for seed in 0..v {
                if let Some(edges) = pred_cycle(g, &pred, seed, &mut stamp, &mut visit) {
                    let cost: f64 = edges.iter().map(|&e| weight(e)).sum();
                    if cost < -eps {
                        return Err(Error::NeedsLargerAlpha { k: level_for_error });
                    }
                }
            }
            return Ok(dist);
        }
    }
    Ok(dist)
}

/// Single-source shortest paths under an arbitrary weighting (negative edges
/// allowed, negative cycles refused with [`Error::NeedsLargerAlpha`]).
pub(crate) fn sssp<W: Fn(usize) -> f64>(
    g: &ActionGraph,
    weight: W,
    source: usize,
    eps: f64,
    level_for_error: f64,
) -> Result<Vec<f64>> {
    let v = g.node_count();
    let s = g.stencil.len();
    let mut dist = vec![f64::INFINITY; v];
    dist[source] = 0.0;
    let mut pred = vec![NO_PRED; v];
    for round in 0..v {
        let mut changed = false;
        for u in 0..v {
            let du = dist[u];
            if !du.is_finite() {
                continue;
            }
            let base = u * s;
            for j in 0..s {
                let e = base + j;
                let cand = du + weight(e);
                let h = g.head[e] as usize;
                if cand < dist[h] {
                    dist[h] = cand;
                    pred[h] = e as u32;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(dist);
        }
        if round + 1 == v {
            let mut stamp = 0u32;
            let mut visit = vec![0u32; v];
            for seed in 0..v {
                if pred[seed] == NO_PRED {
                    continue;
                }
                if let Some(edges) = pred_cycle(g, &pred, seed, &mut stamp, &mut visit) {
                    let cost: f64 = edges.iter().map(|&e| weight(e)).sum();
                    if cost < -eps {
                        return Err(Error::NeedsLargerAlpha { k: level_for_error });
                    }
                }
            }
            return Ok(dist);
        }
    }
    Ok(dist)
}

/// Does some cycle have Σ w_k < −eps? Returns the certified witness if so.
///
/// `eps` defaults (via [`ActionGraph::default_cycle_eps`]) to 1e-12 per edge;
/// pass a custom threshold to probe tighter or looser certification.
pub fn has_negative_cycle(
    g: &ActionGraph,
    k: f64,
    eps: f64,
) -> Result<Option<NegativeCycleWitness>> {
    if !k.is_finite() {
        return Err(Error::NonFinite("level k"));
    }
    if k < 0.0 {
        return Err(Error::NegativeLevel);
    }
    let sqrt_2k = math::sqrt(2.0 * k);
    Ok(
        negative_cycle(g, |e| g.weight_with_sqrt(e, sqrt_2k), eps).map(|(edges, cost)| {
            NegativeCycleWitness {
                edges,
                level: k,
                cost,
            }
        }),
    )
}

/// Knobs for the critical-value bisection.
#[derive(Debug, Clone, Copy)]
pub struct CriticalValueParams {
    /// Stop once the bracket is this narrow (absolute).
    pub tol: f64,
    /// Hard cap on negative-cycle evaluations (doubling + bisection).
    pub max_evaluations: u32,
    /// Certification threshold; None uses the graph default.
    pub eps_cycle: Option<f64>,
}

impl Default for CriticalValueParams {
    fn default() -> Self {
        CriticalValueParams {
            tol: 1e-9,
            max_evaluations: 60,
            eps_cycle: None,
        }
    }
}

/// The bisection's output: midpoint value, certified bracket, work count and
/// the witness justifying the bracket's lower end.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalValueResult {
    /// Midpoint of the final bracket.
    pub alpha: f64,
    /// (lo, hi): negative cycle certified at lo (when lo > 0 or a witness is
    /// present), none found at hi. Shortest-path stages should run at hi.
    pub bracket: (f64, f64),
    /// Number of negative-cycle evaluations spent.
    pub evaluations: u32,
    /// The last certified negative cycle (at level `bracket.0`); None only
    /// when α = 0 was decided without one (zero class, or below resolution).
    pub witness: Option<NegativeCycleWitness>,
    /// The certification threshold that was in force.
    pub eps_cycle: f64,
}

/// The discrete critical value α(c): the smallest k ≥ 0 with no certified
/// negative w_k-cycle, located by doubling + bisection.
///
/// For the zero class this returns 0 exactly without touching the graph
/// (w_0 ≡ √0·ℓ ≥ 0 when c = 0). Otherwise the bracket endpoints are always
/// outcomes of actual detector calls.
pub fn critical_value(g: &ActionGraph, params: CriticalValueParams) -> Result<CriticalValueResult> {
    let eps = params.eps_cycle.unwrap_or_else(|| g.default_cycle_eps());
    if !(params.tol > 0.0) || !params.tol.is_finite() {
        return Err(Error::InvalidParameter("critical value tol must be positive"));
    }
    if g.class.is_zero() {
        return Ok(CriticalValueResult {
            alpha: 0.0,
            bracket: (0.0, 0.0),
            evaluations: 0,
            witness: None,
            eps_cycle: eps,
        });
    }

    let mut evaluations = 0u32;
    let probe = |evaluations: &mut u32, k: f64| -> Result<Option<NegativeCycleWitness>> {
        *evaluations += 1;
        has_negative_cycle(g, k, eps)
    };

    // Certify the lower end at k = 0. For any c ≠ 0 of reasonable size a
    // cycle in the ⟨c,·⟩ > 0 direction is strongly negative; if even that is
    // below the certification threshold, the value is 0 at our resolution.
    let mut witness = match probe(&mut evaluations, 0.0)? {
        Some(w) => w,
        None => {
            return Ok(CriticalValueResult {
                alpha: 0.0,
                bracket: (0.0, 0.0),
                evaluations,
                witness: None,
                eps_cycle: eps,
            });
        }
    };

    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    loop {
        match probe(&mut evaluations, hi)? {
            Some(w) => {
                lo = hi;
                witness = w;
                hi *= 2.0;
                if hi > 1e18 {
                    return Err(Error::NonFinite("critical value bracket diverged"));
                }
            }
            None => break,
        }
    }

    while hi - lo > params.tol && evaluations < params.max_evaluations {
        let mid = 0.5 * (lo + hi);
        match probe(&mut evaluations, mid)? {
            Some(w) => {
                lo = mid;
                witness = w;
            }
            None => hi = mid,
        }
    }

    Ok(CriticalValueResult {
        alpha: 0.5 * (lo + hi),
        bracket: (lo, hi),
        evaluations,
        witness: Some(witness),
        eps_cycle: eps,
    })
}

/// Lower bound on α(c) from a probe loop, via the optimal-speed lemma.
///
/// The loop's Finsler length S = Σ m_step |Δx_step| (graph convention) gives
/// the unit-period action a = S²/2; with b = ⟨c, ρ(γ)⟩ the bound is b²/4a =
/// (b/S)²/2. The discrete critical value is the supremum of that ratio over
/// *graph* cycles, so the bound is guaranteed not to exceed it only when
/// every step of the probe loop lies in the graph's stencil; a loop with
/// longer strides can certify a lower bound for a finer discretization.
pub fn alpha_lower_bound_from_loop(g: &ActionGraph, lp: &DiscreteLoop) -> Result<SpeedProfile> {
    let grid = g.grid;
    lp.validate(grid)?;
    let n = grid.n() as f64;
    let metric = &g.metric;
    let mut length = 0.0;
    for (i, node) in lp.nodes.iter().enumerate() {
        let d = lp.displacements[i];
        let next = grid.step(*node, d);
        let me = 0.5 * (metric.ef_half(*node) + metric.ef_half(next));
        let dx = d.dx as f64 / n;
        let dy = d.dy as f64 / n;
        length += me * math::norm2(dx, dy);
    }
    if length <= 0.0 {
        return Err(Error::NonpositiveAction);
    }
    let (z1, z2) = homology_class(grid, lp)?;
    let b = g.class.c1 * z1 as f64 + g.class.c2 * z2 as f64;
    optimal_speed(0.5 * length * length, b)
}
