//! Torus geometry: grids, velocity stencils, conformal metrics, loops.
//!
//! The torus is T² = R²/Z² sampled on an n × n grid with spacing Δ = 1/n.
//! Node (ix, iy) sits at (ix/n, iy/n); indices are row-major with iy outer.
//! A velocity stencil collects the admissible one-step displacements: all
//! integer offsets (a, b) with 0 < a² + b² ≤ R², plus the rest offset (0, 0).
//!
//! Metrics are conformally flat, g̃ = e^{f} · (flat), described symbolically
//! by a [`MetricSpec`] (zero, Fourier modes, periodic Gaussian bumps, or a
//! recorded conformal perturbation) and realized by [`build_metric`] as node
//! samples of f. The symbolic spec travels with the metric so an instance can
//! be rebuilt from its description alone.
//!
//! Discrete closed curves are [`DiscreteLoop`]s: node sequences together with
//! *unreduced* integer step displacements, so the homology class
//! ρ(γ) = (Σ steps)/n ∈ H₁(T², Z) ≅ Z² is recovered exactly by integer
//! arithmetic, and ⟨c, ρ(γ)⟩ is the pairing of a cohomology class
//! c ∈ H¹(T², R) ≅ R² with the loop.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// A grid node, addressed by its integer coordinates in [0, n)².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub ix: usize,
    pub iy: usize,
}

impl Node {
    pub fn new(ix: usize, iy: usize) -> Self {
        Node { ix, iy }
    }
}

/// An integer one-step displacement in grid cells (unreduced, may be any
/// magnitude when used inside a [`DiscreteLoop`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Offset {
    pub dx: i32,
    pub dy: i32,
}

impl Offset {
    pub fn new(dx: i32, dy: i32) -> Self {
        Offset { dx, dy }
    }

    /// Squared Euclidean length in cells.
    pub fn norm_sq(self) -> i64 {
        let (dx, dy) = (self.dx as i64, self.dy as i64);
        dx * dx + dy * dy
    }
}

/// The n × n discretization of T². Spacing is Δ = 1/n.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    n: usize,
}

impl TorusGrid {
    /// A grid needs at least two nodes per side to carry any geometry.
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter("grid.n must be at least 2"));
        }
        Ok(TorusGrid { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.n * self.n
    }

    /// Grid spacing Δ = 1/n.
    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Row-major index (iy outer) of a node.
    pub fn index(&self, node: Node) -> usize {
        debug_assert!(node.ix < self.n && node.iy < self.n);
        node.iy * self.n + node.ix
    }

    pub fn node(&self, index: usize) -> Node {
        debug_assert!(index < self.node_count());
        Node {
            ix: index % self.n,
            iy: index / self.n,
        }
    }

    /// Torus coordinates of a node. Computed as i/n directly (not i·Δ) so
    /// each coordinate is a single correctly rounded quotient.
    pub fn coords(&self, node: Node) -> (f64, f64) {
        (
            node.ix as f64 / self.n as f64,
            node.iy as f64 / self.n as f64,
        )
    }

    /// The node reached from `node` by `offset`, wrapping modulo n.
    pub fn step(&self, node: Node, offset: Offset) -> Node {
        let n = self.n as i64;
        let ix = (node.ix as i64 + offset.dx as i64).rem_euclid(n);
        let iy = (node.iy as i64 + offset.dy as i64).rem_euclid(n);
        Node {
            ix: ix as usize,
            iy: iy as usize,
        }
    }
}

/// The admissible one-step velocities: all integer offsets with
/// 0 < a² + b² ≤ R², preceded by the rest offset (0, 0).
///
/// The ordering — rest first, then increasing |offset|², ties by (dy, dx) —
/// is part of the contract: edge identifiers and iteration order throughout
/// the graph modules derive from it, which is what makes runs reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VelocityStencil {
    radius: i32,
    offsets: Vec<Offset>,
}

impl VelocityStencil {
    /// The disc stencil of the given integer radius (≥ 1).
    pub fn disc(radius: i32) -> Result<Self> {
        if radius < 1 {
            return Err(Error::InvalidParameter("stencil.radius must be at least 1"));
        }
        let r2 = (radius as i64) * (radius as i64);
        let mut offsets = Vec::new();
        offsets.push(Offset::new(0, 0));
        let mut moving = Vec::new();
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let off = Offset::new(dx, dy);
                let s = off.norm_sq();
                if s > 0 && s <= r2 {
                    moving.push(off);
                }
            }
        }
        moving.sort_by_key(|o| (o.norm_sq(), o.dy, o.dx));
        offsets.extend(moving);
        Ok(VelocityStencil { radius, offsets })
    }

    pub fn radius(&self) -> i32 {
        self.radius
    }

    pub fn offsets(&self) -> &[Offset] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        false // always carries at least the rest offset
    }
}

/// A cohomology class c ∈ H¹(T², R) ≅ R², identified with the closed
/// one-form c₁ dx₁ + c₂ dx₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CohomologyClass {
    pub c1: f64,
    pub c2: f64,
}

impl CohomologyClass {
    pub fn new(c1: f64, c2: f64) -> Self {
        CohomologyClass { c1, c2 }
    }

    pub fn zero() -> Self {
        CohomologyClass { c1: 0.0, c2: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.c1 == 0.0 && self.c2 == 0.0
    }

    /// ⟨c, v⟩ for a velocity or displacement v in torus units.
    pub fn pair(&self, v: (f64, f64)) -> f64 {
        self.c1 * v.0 + self.c2 * v.1
    }
}

/// One Fourier mode of the conformal exponent:
/// amplitude · sin(2π (mx·x₁ + my·x₂) + phase).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierMode {
    pub mx: i32,
    pub my: i32,
    pub amplitude: f64,
    pub phase: f64,
}

/// One periodic Gaussian bump: amplitude · Σ_t exp(−|x − center + t|² / 2w²),
/// summed over the 3 × 3 block of lattice translates t ∈ {−1, 0, 1}².
///
/// For widths ≤ 0.2 the omitted translates contribute below ~4e-6 of the
/// amplitude; the truncation is part of the definition (the same sum is used
/// everywhere, including in reference re-evaluations), so it costs no
/// internal consistency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBump {
    pub cx: f64,
    pub cy: f64,
    pub amplitude: f64,
    pub width: f64,
}

impl GaussianBump {
    /// The periodic bump evaluated at torus coordinates (x, y),
    /// amplitude included.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut s = 0.0;
        let two_w_sq = 2.0 * self.width * self.width;
        for ty in [-1.0f64, 0.0, 1.0] {
            for tx in [-1.0f64, 0.0, 1.0] {
                let dx = x - self.cx + tx;
                let dy = y - self.cy + ty;
                s += math::exp(-(dx * dx + dy * dy) / two_w_sq);
            }
        }
        self.amplitude * s
    }
}

/// Symbolic description of a conformal factor e^{f}. Kept alongside the
/// sampled values so any instance can be reconstructed from its description.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpec {
    /// f ≡ 0: the flat metric.
    Flat,
    /// f(x) = Σ modes.
    Fourier(Vec<FourierMode>),
    /// f(x) = Σ periodic Gaussian bumps.
    Bumps(Vec<GaussianBump>),
    /// A conformal rescale g̃ = (1 + 2u) g of a base metric, with u the given
    /// bump field: f = f_base + ln(1 + 2u). Requires 1 + 2u > 0.
    Perturbed {
        base: Box<MetricSpec>,
        u_bumps: Vec<GaussianBump>,
    },
}

impl MetricSpec {
    /// Pointwise evaluation of the conformal exponent f at torus coordinates.
    ///
    /// Fails with [`Error::MetricConstraint`] if a perturbation leaves the
    /// metric cone at this point.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        match self {
            MetricSpec::Flat => Ok(0.0),
            MetricSpec::Fourier(modes) => {
                let mut f = 0.0;
                for m in modes {
                    let arg = core::f64::consts::TAU * (m.mx as f64 * x + m.my as f64 * y)
                        + m.phase;
                    f += m.amplitude * math::sin(arg);
                }
                Ok(f)
            }
            MetricSpec::Bumps(bumps) => Ok(bumps.iter().map(|b| b.eval(x, y)).sum()),
            MetricSpec::Perturbed { base, u_bumps } => {
                let mut u = 0.0;
                for b in u_bumps {
                    u += b.eval(x, y);
                }
                let factor = 1.0 + 2.0 * u;
                if factor <= 0.0 {
                    return Err(Error::MetricConstraint);
                }
                Ok(base.eval(x, y)? + math::ln(factor))
            }
        }
    }
}

/// A conformally flat metric g̃ = e^{f} · (flat) sampled on a grid.
///
/// Carries both the node values of f and the cached values of e^{f/2}
/// (every graph weight is built from the latter).
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalMetric {
    grid: TorusGrid,
    spec: MetricSpec,
    f: Vec<f64>,
    ef_half: Vec<f64>,
}

impl ConformalMetric {
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn spec(&self) -> &MetricSpec {
        &self.spec
    }

    /// The conformal exponent f at a node.
    pub fn f(&self, node: Node) -> f64 {
        self.f[self.grid.index(node)]
    }

    /// e^{f/2} at a node (the pointwise Finsler density of g̃).
    pub fn ef_half(&self, node: Node) -> f64 {
        self.ef_half[self.grid.index(node)]
    }

    pub fn f_values(&self) -> &[f64] {
        &self.f
    }

    pub(crate) fn ef_half_values(&self) -> &[f64] {
        &self.ef_half
    }
}

/// Sample a metric spec on a grid.
///
/// Evaluation order is fixed (row-major nodes, spec terms in declaration
/// order), so two calls with equal inputs produce bitwise-identical tables.
pub fn build_metric(spec: &MetricSpec, grid: TorusGrid) -> Result<ConformalMetric> {
    let mut f = Vec::with_capacity(grid.node_count());
    for idx in 0..grid.node_count() {
        let (x, y) = grid.coords(grid.node(idx));
        let v = spec.eval(x, y)?;
        if !v.is_finite() {
            return Err(Error::NonFinite("metric exponent f"));
        }
        f.push(v);
    }
    let ef_half = f.iter().map(|&v| math::exp(0.5 * v)).collect();
    Ok(ConformalMetric {
        grid,
        spec: spec.clone(),
        f,
        ef_half,
    })
}

/// A scalar field sampled on the grid nodes (used for test functions u in
/// the measure pairing and for perturbation fields).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::GridMismatch);
        }
        Ok(ScalarField { grid, values })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        ScalarField {
            grid,
            values: alloc::vec![0.0; grid.node_count()],
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn value(&self, node: Node) -> f64 {
        self.values[self.grid.index(node)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// A closed discrete curve: nodes visited in order, with the unreduced
/// integer displacement of each step and a uniform timestep h > 0.
///
/// `nodes[i+1 mod len] = nodes[i] + displacements[i] (mod n)` must hold;
/// the *unreduced* displacements are what carries the homology class.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLoop {
    pub nodes: Vec<Node>,
    pub displacements: Vec<Offset>,
    pub timestep: f64,
}

impl DiscreteLoop {
    /// Validate and build a loop on the given grid.
    pub fn new(
        grid: TorusGrid,
        nodes: Vec<Node>,
        displacements: Vec<Offset>,
        timestep: f64,
    ) -> Result<Self> {
        let lp = DiscreteLoop {
            nodes,
            displacements,
            timestep,
        };
        lp.validate(grid)?;
        Ok(lp)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Check the structural invariants against a grid.
    pub fn validate(&self, grid: TorusGrid) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::MalformedLoop("loop has no nodes"));
        }
        if self.nodes.len() != self.displacements.len() {
            return Err(Error::MalformedLoop("nodes and displacements differ in length"));
        }
        if !(self.timestep > 0.0) || !self.timestep.is_finite() {
            return Err(Error::MalformedLoop("timestep must be positive and finite"));
        }
        let len = self.nodes.len();
        for i in 0..len {
            let node = self.nodes[i];
            if node.ix >= grid.n() || node.iy >= grid.n() {
                return Err(Error::MalformedLoop("node outside the grid"));
            }
            let next = self.nodes[(i + 1) % len];
            if grid.step(node, self.displacements[i]) != next {
                return Err(Error::MalformedLoop("displacement does not reach next node"));
            }
        }
        Ok(())
    }

    /// Total unreduced displacement in cells (n · homology class).
    pub fn total_displacement(&self) -> (i64, i64) {
        let mut dx = 0i64;
        let mut dy = 0i64;
        for d in &self.displacements {
            dx += d.dx as i64;
            dy += d.dy as i64;
        }
        (dx, dy)
    }

    /// The loop traversed backwards (steps negated in reverse order).
    pub fn reversed(&self) -> DiscreteLoop {
        let len = self.nodes.len();
        let mut nodes = Vec::with_capacity(len);
        let mut displacements = Vec::with_capacity(len);
        for i in 0..len {
            // Reversed loop visits nodes[0], nodes[len-1], ..., nodes[1];
            // step i undoes the forward step into the visited node.
            nodes.push(self.nodes[(len - i) % len]);
            displacements.push(Offset::new(
                -self.displacements[len - 1 - i].dx,
                -self.displacements[len - 1 - i].dy,
            ));
        }
        DiscreteLoop {
            nodes,
            displacements,
            timestep: self.timestep,
        }
    }

    /// Concatenation with a loop based at the same start node.
    pub fn concatenated(&self, other: &DiscreteLoop) -> Result<DiscreteLoop> {
        if self.nodes.is_empty() || other.nodes.is_empty() {
            return Err(Error::MalformedLoop("cannot concatenate an empty loop"));
        }
        if self.nodes[0] != other.nodes[0] {
            return Err(Error::MalformedLoop("concatenation needs a common base node"));
        }
        let mut nodes = self.nodes.clone();
        nodes.extend_from_slice(&other.nodes);
        let mut displacements = self.displacements.clone();
        displacements.extend_from_slice(&other.displacements);
        Ok(DiscreteLoop {
            nodes,
            displacements,
            timestep: self.timestep,
        })
    }
}

/// The homology class ρ(γ) ∈ Z² of a loop on the given grid.
///
/// Exact integer arithmetic: the unreduced displacement sum of a closed loop
/// is a multiple of n in each coordinate, and the class is that multiple.
pub fn homology_class(grid: TorusGrid, lp: &DiscreteLoop) -> Result<(i64, i64)> {
    lp.validate(grid)?;
    let (dx, dy) = lp.total_displacement();
    let n = grid.n() as i64;
    if dx % n != 0 || dy % n != 0 {
        // validate() guarantees closure mod n, so this is unreachable for a
        // valid loop; keep the check so corrupted data cannot alias a class.
        return Err(Error::MalformedLoop("displacement sum not divisible by n"));
    }
    Ok((dx / n, dy / n))
}

/// ⟨c, ρ(γ)⟩: the pairing of a cohomology class with the loop's homology.
pub fn one_form_pairing(grid: TorusGrid, c: CohomologyClass, lp: &DiscreteLoop) -> Result<f64> {
    let (z1, z2) = homology_class(grid, lp)?;
    Ok(c.c1 * z1 as f64 + c.c2 * z2 as f64)
}

/// The fundamental loop in direction `offset` through `start`, stepping by
/// `offset` until it closes. Requires gcd-compatibility with n only in the
/// sense that it keeps stepping until it returns to the start (at most n²
/// steps); the usual uses are the axis loops (1,0) and (0,1) and diagonals.
pub fn fundamental_loop(
    grid: TorusGrid,
    start: Node,
    offset: Offset,
    timestep: f64,
) -> Result<DiscreteLoop> {
    if offset.dx == 0 && offset.dy == 0 {
        return Err(Error::MalformedLoop("fundamental loop needs a moving offset"));
    }
    let mut nodes = Vec::new();
    let mut displacements = Vec::new();
    let mut node = start;
    for _ in 0..grid.node_count() {
        nodes.push(node);
        displacements.push(offset);
        node = grid.step(node, offset);
        if node == start {
            return DiscreteLoop::new(grid, nodes, displacements, timestep);
        }
    }
    Err(Error::MalformedLoop("offset orbit does not close"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid8() -> TorusGrid {
        TorusGrid::new(8).unwrap()
    }

    #[test]
    fn spacing_times_n_is_one() {
        // n·(1/n) recovers 1.0 exactly for powers of two (1/n is dyadic) and
        // to within one ulp for every other n — e.g. n = 49 rounds down.
        for n in 2..=512usize {
            let g = TorusGrid::new(n).unwrap();
            let prod = g.spacing() * n as f64;
            if n.is_power_of_two() {
                assert_eq!(prod, 1.0, "n = {n}");
            } else {
                assert!((prod - 1.0).abs() <= f64::EPSILON, "n = {n}: {prod}");
            }
        }
    }

    #[test]
    fn grid_rejects_degenerate_side() {
        assert_eq!(
            TorusGrid::new(1).unwrap_err(),
            Error::InvalidParameter("grid.n must be at least 2")
        );
    }

    #[test]
    fn stencil_radius_one_is_von_neumann_plus_rest() {
        let s = VelocityStencil::disc(1).unwrap();
        assert_eq!(s.len(), 5);
        assert_eq!(s.offsets()[0], Offset::new(0, 0));
    }

    #[test]
    fn stencil_radius_three_has_29_offsets() {
        // 28 moving offsets with 0 < a² + b² ≤ 9, plus rest.
        let s = VelocityStencil::disc(3).unwrap();
        assert_eq!(s.len(), 29);
        assert!(s.offsets().iter().all(|o| o.norm_sq() <= 9));
    }

    #[test]
    fn stencil_is_symmetric_under_negation() {
        let s = VelocityStencil::disc(3).unwrap();
        for &o in s.offsets() {
            let neg = Offset::new(-o.dx, -o.dy);
            assert!(s.offsets().contains(&neg));
        }
    }

    #[test]
    fn step_wraps_both_ways() {
        let g = grid8();
        assert_eq!(g.step(Node::new(7, 0), Offset::new(1, -1)), Node::new(0, 7));
        assert_eq!(g.step(Node::new(0, 3), Offset::new(-2, 0)), Node::new(6, 3));
    }

    #[test]
    fn flat_metric_is_identically_zero() {
        let m = build_metric(&MetricSpec::Flat, grid8()).unwrap();
        assert!(m.f_values().iter().all(|&v| v == 0.0));
        assert!(m.ef_half_values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn fourier_mode_hits_its_peak_node() {
        // f(x) = ε sin(2π x₂) equals ε at x₂ = 1/4.
        let eps = 0.1;
        let spec = MetricSpec::Fourier(alloc::vec![FourierMode {
            mx: 0,
            my: 1,
            amplitude: eps,
            phase: 0.0,
        }]);
        let m = build_metric(&spec, grid8()).unwrap();
        let peak = m.f(Node::new(0, 2)); // iy = n/4
        assert!((peak - eps).abs() < 1e-15);
        // and is constant along rows
        for ix in 0..8 {
            assert_eq!(m.f(Node::new(ix, 2)), peak);
        }
    }

    #[test]
    fn bump_metric_matches_direct_resummation() {
        // Independent re-evaluation of the 3×3 translate sum, written out
        // longhand, must agree bitwise with the library path.
        let bump = GaussianBump {
            cx: 0.3,
            cy: 0.7,
            amplitude: 0.05,
            width: 0.15,
        };
        let spec = MetricSpec::Bumps(alloc::vec![bump]);
        let g = grid8();
        let m = build_metric(&spec, g).unwrap();
        for idx in 0..g.node_count() {
            let node = g.node(idx);
            let (x, y) = g.coords(node);
            let mut expect = 0.0;
            for ty in [-1.0f64, 0.0, 1.0] {
                for tx in [-1.0f64, 0.0, 1.0] {
                    let dx = x - 0.3 + tx;
                    let dy = y - 0.7 + ty;
                    expect += (-(dx * dx + dy * dy) / (2.0 * 0.15 * 0.15)).exp();
                }
            }
            assert_eq!(m.f(node), 0.05 * expect);
        }
    }

    #[test]
    fn build_metric_is_deterministic() {
        let spec = MetricSpec::Bumps(alloc::vec![GaussianBump {
            cx: 0.11,
            cy: 0.86,
            amplitude: -0.04,
            width: 0.09,
        }]);
        let a = build_metric(&spec, grid8()).unwrap();
        let b = build_metric(&spec, grid8()).unwrap();
        assert_eq!(a.f_values(), b.f_values());
    }

    #[test]
    fn perturbed_spec_outside_cone_is_rejected() {
        let spec = MetricSpec::Perturbed {
            base: Box::new(MetricSpec::Flat),
            u_bumps: alloc::vec![GaussianBump {
                cx: 0.5,
                cy: 0.5,
                amplitude: -0.7, // 1 + 2u < 0 at the center
                width: 0.1,
            }],
        };
        assert_eq!(build_metric(&spec, grid8()).unwrap_err(), Error::MetricConstraint);
    }

    #[test]
    fn horizontal_fundamental_loop_has_class_one_zero() {
        let g = grid8();
        let lp = fundamental_loop(g, Node::new(0, 3), Offset::new(1, 0), g.spacing()).unwrap();
        assert_eq!(lp.len(), 8);
        assert_eq!(homology_class(g, &lp).unwrap(), (1, 0));
        let c = CohomologyClass::new(2.0, -1.0);
        assert_eq!(one_form_pairing(g, c, &lp).unwrap(), 2.0);
    }

    #[test]
    fn diagonal_loop_has_class_one_one() {
        let g = grid8();
        let lp = fundamental_loop(g, Node::new(2, 5), Offset::new(1, 1), g.spacing()).unwrap();
        assert_eq!(homology_class(g, &lp).unwrap(), (1, 1));
    }

    #[test]
    fn contractible_square_has_class_zero() {
        let g = grid8();
        let nodes = alloc::vec![
            Node::new(1, 1),
            Node::new(2, 1),
            Node::new(2, 2),
            Node::new(1, 2),
        ];
        let disp = alloc::vec![
            Offset::new(1, 0),
            Offset::new(0, 1),
            Offset::new(-1, 0),
            Offset::new(0, -1),
        ];
        let lp = DiscreteLoop::new(g, nodes, disp, 0.125).unwrap();
        assert_eq!(homology_class(g, &lp).unwrap(), (0, 0));
        assert_eq!(
            one_form_pairing(g, CohomologyClass::new(3.0, 4.0), &lp).unwrap(),
            0.0
        );
    }

    #[test]
    fn reversal_negates_homology() {
        let g = grid8();
        let lp = fundamental_loop(g, Node::new(0, 0), Offset::new(1, 2), g.spacing()).unwrap();
        let rev = lp.reversed();
        rev.validate(g).unwrap();
        let (z1, z2) = homology_class(g, &lp).unwrap();
        assert_eq!(homology_class(g, &rev).unwrap(), (-z1, -z2));
    }

    #[test]
    fn concatenation_adds_homology() {
        let g = grid8();
        let a = fundamental_loop(g, Node::new(0, 0), Offset::new(1, 0), g.spacing()).unwrap();
        let b = fundamental_loop(g, Node::new(0, 0), Offset::new(0, 1), g.spacing()).unwrap();
        let ab = a.concatenated(&b).unwrap();
        ab.validate(g).unwrap();
        assert_eq!(homology_class(g, &ab).unwrap(), (1, 1));
    }

    #[test]
    fn malformed_loops_are_rejected() {
        let g = grid8();
        // wrong displacement
        let bad = DiscreteLoop {
            nodes: alloc::vec![Node::new(0, 0), Node::new(1, 0)],
            displacements: alloc::vec![Offset::new(1, 0), Offset::new(1, 0)],
            timestep: 0.1,
        };
        assert!(matches!(bad.validate(g), Err(Error::MalformedLoop(_))));
        // non-positive timestep
        let bad = DiscreteLoop {
            nodes: alloc::vec![Node::new(0, 0)],
            displacements: alloc::vec![Offset::new(0, 0)],
            timestep: 0.0,
        };
        assert!(matches!(bad.validate(g), Err(Error::MalformedLoop(_))));
    }
}
