//! Shared shortest-path and connectivity machinery.
//!
//! Everything downstream of the critical value works with *reduced*
//! nonnegative edge weights ŵ(e) = w(e) + π(tail) − π(head), so Dijkstra
//! applies. The searches here are radius-pruned: callers only ever care
//! about the near-zero neighborhood of a node (Aubry membership, tight-edge
//! tests, static-class pairing), and pruning keeps per-node sweeps
//! proportional to the size of that neighborhood instead of the whole graph.
//!
//! All iteration orders are fixed (ascending node/edge ids, heap ties broken
//! by node id), so results are bit-reproducible run to run.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::alpha::ActionGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    dist: f64,
    node: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; invert so the smallest distance pops
        // first, with node id as a deterministic tie-break.
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Reusable buffers for radius-pruned Dijkstra runs over one graph's nodes.
///
/// Distances persist until the next `run`; only the touched entries are
/// reset, so repeated small-ball searches on a large graph stay cheap.
pub(crate) struct DijkstraScratch {
    dist: Vec<f64>,
    touched: Vec<u32>,
    heap: BinaryHeap<HeapEntry>,
}

impl DijkstraScratch {
    pub fn new(node_count: usize) -> Self {
        DijkstraScratch {
            dist: vec![f64::INFINITY; node_count],
            touched: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }

    /// Single-source shortest paths from `source` under nonnegative
    /// per-edge weights, discarding anything beyond `radius`.
    pub fn run<W: Fn(usize) -> f64>(
        &mut self,
        g: &ActionGraph,
        weight: W,
        source: usize,
        radius: f64,
    ) {
        for &t in &self.touched {
            self.dist[t as usize] = f64::INFINITY;
        }
        self.touched.clear();
        self.heap.clear();

        let s = g.stencil().len();
        self.dist[source] = 0.0;
        self.touched.push(source as u32);
        self.heap.push(HeapEntry {
            dist: 0.0,
            node: source as u32,
        });
        while let Some(HeapEntry { dist: d, node }) = self.heap.pop() {
            let u = node as usize;
            if d > self.dist[u] {
                continue;
            }
            let base = u * s;
            for j in 0..s {
                let e = base + j;
                let nd = d + weight(e);
                let h = g.head(e);
                if nd <= radius && nd < self.dist[h] {
                    if self.dist[h].is_infinite() {
                        self.touched.push(h as u32);
                    }
                    self.dist[h] = nd;
                    self.heap.push(HeapEntry {
                        dist: nd,
                        node: h as u32,
                    });
                }
            }
        }
    }

    /// Distance settled by the last `run` (INFINITY when unreached).
    #[inline]
    pub fn dist(&self, node: usize) -> f64 {
        self.dist[node]
    }

    /// Nodes reached by the last `run`, in first-touch order.
    pub fn reached(&self) -> &[u32] {
        &self.touched
    }
}

/// Strongly connected components of a digraph given as adjacency lists over
/// compact indices. Iterative Tarjan; each component is returned sorted and
/// the list of components is ordered by smallest member.
pub(crate) fn strongly_connected(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    const UNSET: u32 = u32::MAX;
    let mut index = vec![UNSET; n];
    let mut lowlink = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut next_index = 0u32;
    let mut components: Vec<Vec<usize>> = Vec::new();
    // explicit DFS frames: (node, position in its adjacency list)
    let mut frames: Vec<(u32, u32)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSET {
            continue;
        }
        frames.push((root as u32, 0));
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root as u32);
        on_stack[root] = true;

        while !frames.is_empty() {
            let top = frames.len() - 1;
            let (v_id, pos) = frames[top];
            let v = v_id as usize;
            if (pos as usize) < adj[v].len() {
                frames[top].1 = pos + 1;
                let w = adj[v][pos as usize];
                if index[w] == UNSET {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    frames.push((w as u32, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&(p, _)) = frames.last() {
                    let p = p as usize;
                    lowlink[p] = lowlink[p].min(lowlink[v]);
                }
                if lowlink[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w as usize] = false;
                        comp.push(w as usize);
                        if w as usize == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    components.push(comp);
                }
            }
        }
    }
    components.sort_by_key(|c| c[0]);
    components
}

/// Plain union–find with path halving, used to merge static classes.
pub(crate) struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let gp = self.parent[self.parent[x] as usize];
            self.parent[x] = gp;
            x = gp as usize;
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            // keep the smaller index as root so representatives are stable
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo as u32;
        }
    }
}
