//! Mañé potentials, Peierls barriers, the Aubry set and its static classes.
//!
//! At a super-critical level k the edge weights w_k are shortest-path-safe:
//! the Mañé potential φ_k(x, y) is the cheapest total w_k-weight of a path
//! x → y, and the Peierls barrier h_k(x, y) = φ_k(x, y) + φ_k(y, x) prices a
//! round trip. A point is *Aubry* when it can be revisited for free — its
//! cheapest genuine (moving) return cycle costs nothing at the critical
//! level — and two Aubry points are *statically equivalent* when the barrier
//! between them vanishes. The classes of that equivalence are the discrete
//! stand-in for the quotient Aubry set, whose cardinality for generic data
//! is the object of the genericity experiments in [`crate::lab`].
//!
//! Numerically, "vanishes" means "≤ ε": the detection threshold ε_aubry is
//! absolute and sits orders of magnitude above the bisection slack that a
//! true zero cycle accumulates (≈ bracket width) and below the cost of any
//! genuine detour (O(Δf · Δx) for the barrier between distinct wells), so
//! the classification is stable across a wide band of choices. Membership
//! and pairing are computed on *reduced* weights ŵ(e) = w_k(e) + π(tail) −
//! π(head) ≥ 0 (π from a converged Bellman–Ford pass), where every search
//! is a radius-limited Dijkstra: cycles through x cost the same in reduced
//! and raw weights, so the thresholds transfer verbatim.

use alloc::vec;
use alloc::vec::Vec;

use crate::alpha::{self, ActionGraph};
use crate::math;
use crate::paths::{DijkstraScratch, UnionFind};
use crate::{Error, Result};

/// Default absolute threshold for "vanishing" cyclic cost and barriers.
pub const DEFAULT_AUBRY_EPS: f64 = 1e-6;

/// Mañé potentials from a set of seed nodes: φ(seed, ·) row by row.
#[derive(Debug, Clone)]
pub struct PotentialField {
    /// The level the potentials were computed at.
    pub k: f64,
    /// Seed nodes, in the order the rows are stored.
    pub seeds: Vec<usize>,
    /// Row-major: `phi[i * node_count + x]` = φ(seeds[i], x).
    pub phi: Vec<f64>,
    node_count: usize,
}

impl PotentialField {
    /// φ(seed, x); `MissingSeed` when the seed row was never computed.
    pub fn value(&self, seed: usize, x: usize) -> Result<f64> {
        let row = self
            .seeds
            .iter()
            .position(|&s| s == seed)
            .ok_or(Error::MissingSeed)?;
        if x >= self.node_count {
            return Err(Error::GridMismatch);
        }
        Ok(self.phi[row * self.node_count + x])
    }
}

/// Single-source Mañé potentials φ_k(seed, ·) for each requested seed, by
/// Bellman–Ford under w_k (negative edges are fine; a certified negative
/// cycle means the level is sub-critical and fails with
/// [`Error::NeedsLargerAlpha`]).
pub fn mane_potential(g: &ActionGraph, k: f64, seeds: &[usize]) -> Result<PotentialField> {
    if !k.is_finite() {
        return Err(Error::NonFinite("level k"));
    }
    if k < 0.0 {
        return Err(Error::NegativeLevel);
    }
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("no seed nodes"));
    }
    let v = g.node_count();
    for &s in seeds {
        if s >= v {
            return Err(Error::GridMismatch);
        }
    }
    let sqrt_2k = math::sqrt(2.0 * k);
    let eps = g.default_cycle_eps();
    let mut phi = Vec::with_capacity(seeds.len() * v);
    for &s in seeds {
        let dist = alpha::sssp(g, |e| g.weight_with_sqrt(e, sqrt_2k), s, eps, k)?;
        phi.extend_from_slice(&dist);
    }
    Ok(PotentialField {
        k,
        seeds: seeds.to_vec(),
        phi,
        node_count: v,
    })
}

/// Peierls barrier h_k(x, y) = φ_k(x, y) + φ_k(y, x). Both directions must
/// be present in the field, i.e. both nodes must have been seeds.
pub fn peierls_barrier(field: &PotentialField, x: usize, y: usize) -> Result<f64> {
    Ok(field.value(x, y)? + field.value(y, x)?)
}

/// The Aubry set at level k: membership, and the cyclic defect of every node.
#[derive(Debug, Clone)]
pub struct AubrySet {
    pub k: f64,
    pub eps: f64,
    /// Member node indices, ascending.
    pub members: Vec<usize>,
    /// Per node: the cheapest cost of a moving return cycle through it
    /// (INFINITY when nothing comes back within the search radius).
    pub cyc: Vec<f64>,
}

impl AubrySet {
    pub fn contains(&self, node: usize) -> bool {
        self.cyc[node] <= self.eps
    }
}

fn reduced_weights(g: &ActionGraph, k: f64) -> Result<Vec<f64>> {
    let sqrt_2k = math::sqrt(2.0 * k);
    let eps = g.default_cycle_eps();
    let pi = alpha::potentials(g, |e| g.weight_with_sqrt(e, sqrt_2k), eps, k)?;
    let mut what = Vec::with_capacity(g.edge_count());
    for e in 0..g.edge_count() {
        let w = g.weight_with_sqrt(e, sqrt_2k) + pi[g.tail(e)] - pi[g.head(e)];
        what.push(if w < 0.0 { 0.0 } else { w });
    }
    Ok(what)
}

/// Compute the Aubry set at level k with threshold `eps` (pass
/// [`DEFAULT_AUBRY_EPS`] unless an experiment sweeps it).
///
/// cyc(x) = min over moving edges e into x of [d̂(x → tail e) + ŵ(e)],
/// searched within radius eps; x is a member when cyc(x) ≤ eps. Rest loops
/// are excluded — every node can wait for free, only closed *orbits* count.
pub fn aubry_set(g: &ActionGraph, k: f64, eps: f64) -> Result<AubrySet> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter("aubry eps must be positive"));
    }
    if !k.is_finite() {
        return Err(Error::NonFinite("level k"));
    }
    if k < 0.0 {
        return Err(Error::NegativeLevel);
    }
    let what = reduced_weights(g, k)?;
    let v = g.node_count();

    // incoming moving edges per node
    let mut incoming: Vec<Vec<u32>> = vec![Vec::new(); v];
    for e in 0..g.edge_count() {
        if g.tail(e) != g.head(e) {
            incoming[g.head(e)].push(e as u32);
        }
    }

    let mut scratch = DijkstraScratch::new(v);
    let mut cyc = vec![f64::INFINITY; v];
    for x in 0..v {
        let mut min_in = f64::INFINITY;
        for &e in &incoming[x] {
            let w = what[e as usize];
            if w < min_in {
                min_in = w;
            }
        }
        if min_in > eps {
            // even the cheapest last hop overshoots: x cannot be ε-Aubry,
            // and its true cyc is at least min_in (recorded as such).
            cyc[x] = min_in;
            continue;
        }
        scratch.run(g, |e| what[e], x, eps);
        let mut best = f64::INFINITY;
        for &e in &incoming[x] {
            let e = e as usize;
            let back = scratch.dist(g.tail(e));
            if back.is_finite() {
                let total = back + what[e];
                if total < best {
                    best = total;
                }
            }
        }
        cyc[x] = best;
    }

    let members: Vec<usize> = (0..v).filter(|&x| cyc[x] <= eps).collect();
    Ok(AubrySet {
        k,
        eps,
        members,
        cyc,
    })
}

/// The static partition of an Aubry set.
#[derive(Debug, Clone)]
pub struct StaticClasses {
    /// Number of classes.
    pub count: usize,
    /// Class id of each member (indices parallel `AubrySet::members`);
    /// classes are numbered by ascending representative node.
    pub assignment: Vec<usize>,
    /// Smallest member node of each class.
    pub representatives: Vec<usize>,
    /// Symmetrized barrier δ(rᵢ, rⱼ) between representatives, row-major
    /// `count × count`; empty when `count` exceeds the matrix cap (128).
    pub delta: Vec<f64>,
}

/// Partition the Aubry set into static classes: x ∼ y when the reduced
/// round trip δ(x, y) = d̂(x, y) + d̂(y, x) stays within 2·eps. Pairwise
/// reachability is collected by one radius-(2 eps) Dijkstra per member and
/// merged with union–find; the representative barrier matrix is computed
/// with full-radius searches afterwards.
pub fn static_classes(g: &ActionGraph, set: &AubrySet) -> Result<StaticClasses> {
    let eps = set.eps;
    let what = reduced_weights(g, set.k)?;
    let v = g.node_count();
    let m = set.members.len();
    if m == 0 {
        return Ok(StaticClasses {
            count: 0,
            assignment: Vec::new(),
            representatives: Vec::new(),
            delta: Vec::new(),
        });
    }
    let mut member_index = vec![u32::MAX; v];
    for (i, &x) in set.members.iter().enumerate() {
        member_index[x] = i as u32;
    }

    // sparse one-way distances d̂(xᵢ → xⱼ) for members within radius 2ε
    let mut rows: Vec<Vec<(u32, f64)>> = Vec::with_capacity(m);
    let mut scratch = DijkstraScratch::new(v);
    for &x in &set.members {
        scratch.run(g, |e| what[e], x, 2.0 * eps);
        let mut row: Vec<(u32, f64)> = Vec::new();
        for &node in scratch.reached() {
            let j = member_index[node as usize];
            if j != u32::MAX {
                row.push((j, scratch.dist(node as usize)));
            }
        }
        row.sort_unstable_by_key(|&(j, _)| j);
        rows.push(row);
    }

    let lookup = |rows: &Vec<Vec<(u32, f64)>>, from: usize, to: u32| -> Option<f64> {
        rows[from]
            .binary_search_by_key(&to, |&(j, _)| j)
            .ok()
            .map(|p| rows[from][p].1)
    };

    let mut uf = UnionFind::new(m);
    for i in 0..m {
        for &(j, dij) in &rows[i] {
            let j = j as usize;
            if j <= i {
                continue;
            }
            if let Some(dji) = lookup(&rows, j, i as u32) {
                if dij + dji <= 2.0 * eps {
                    uf.union(i, j);
                }
            }
        }
    }

    // classes numbered by ascending representative (members are ascending,
    // and union-find keeps the smallest index as root)
    let mut class_of_root = vec![u32::MAX; m];
    let mut representatives = Vec::new();
    let mut assignment = vec![0usize; m];
    for i in 0..m {
        let r = uf.find(i);
        if class_of_root[r] == u32::MAX {
            class_of_root[r] = representatives.len() as u32;
            representatives.push(set.members[r]);
        }
        assignment[i] = class_of_root[r] as usize;
    }
    let count = representatives.len();

    // representative barrier matrix (full searches; skip when huge)
    const MATRIX_CAP: usize = 128;
    let mut delta = Vec::new();
    if count <= MATRIX_CAP {
        let mut dists: Vec<Vec<f64>> = Vec::with_capacity(count);
        for &r in &representatives {
            scratch.run(g, |e| what[e], r, f64::INFINITY);
            dists.push((0..v).map(|x| scratch.dist(x)).collect());
        }
        delta.reserve(count * count);
        for i in 0..count {
            for j in 0..count {
                delta.push(dists[i][representatives[j]] + dists[j][representatives[i]]);
            }
        }
    }

    Ok(StaticClasses {
        count,
        assignment,
        representatives,
        delta,
    })
}
