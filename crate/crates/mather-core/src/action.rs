//! Pointwise and loop-level action evaluation.
//!
//! The lagrangian is L(x, v) = ½ e^{f(x)} |v|² with |·| the flat norm; a
//! cohomology class c deforms it to L − c, i.e. the step integrand
//! ½ e^{f} |v|² − ⟨c, v⟩. Because L is quadratic in v, its energy
//! E = ∂_v L · v − L equals the kinetic term again — the identity behind
//! reading energy levels straight off kinetic samples.
//!
//! [`loop_action`] is the trapezoidal quadrature of the deformed action along
//! a [`DiscreteLoop`]: each step contributes h · ½ e^{f̄} |Δx/h|² with f̄ the
//! average of f at the step's endpoints, and the one-form contributes exactly
//! −⟨c, ρ(γ)⟩ (computed through the loop's homology class, not per step, so
//! the c-dependence is exact by construction).
//!
//! [`optimal_speed`] is the scalar lemma used for positive lower bounds on
//! critical values: traversing a fixed loop of unit-period action a > 0 and
//! one-form gain b at speed s costs a s² − b s, minimized at s̄ = b/2a with
//! value −b²/4a, so α(c) ≥ b²/4a whenever b > 0.

use crate::grid::{
    one_form_pairing, CohomologyClass, ConformalMetric, DiscreteLoop, Node, ScalarField,
};
use crate::measures::OccupationMeasure;
use crate::{Error, Result};

/// One evaluation of the (possibly deformed) lagrangian at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionSample {
    /// ½ e^{f(x)} |v|².
    pub kinetic: f64,
    /// ⟨c, v⟩ (zero for the undeformed lagrangian).
    pub form_term: f64,
    /// kinetic − form_term.
    pub total: f64,
}

impl ActionSample {
    /// The mechanical energy E = ∂_v L · v − L = e^{f} |v|² − kinetic.
    ///
    /// For this quadratic lagrangian that is the kinetic term again; the
    /// subtraction is kept literal so the identity is checked, not assumed.
    pub fn energy(&self) -> f64 {
        2.0 * self.kinetic - self.kinetic
    }
}

/// Evaluate the undeformed lagrangian at a node for a velocity in torus
/// units per unit time.
pub fn lagrangian(metric: &ConformalMetric, node: Node, velocity: (f64, f64)) -> ActionSample {
    let speed_sq = velocity.0 * velocity.0 + velocity.1 * velocity.1;
    let ef = metric.ef_half(node) * metric.ef_half(node);
    let kinetic = 0.5 * ef * speed_sq;
    ActionSample {
        kinetic,
        form_term: 0.0,
        total: kinetic,
    }
}

/// Evaluate the deformed lagrangian L − c at a node.
pub fn deformed_lagrangian(
    metric: &ConformalMetric,
    c: CohomologyClass,
    node: Node,
    velocity: (f64, f64),
) -> ActionSample {
    let base = lagrangian(metric, node, velocity);
    let form_term = c.pair(velocity);
    ActionSample {
        kinetic: base.kinetic,
        form_term,
        total: base.kinetic - form_term,
    }
}

/// The deformed action of a discrete loop:
/// Σ_steps h · ½ e^{f̄} |Δx/h|² − ⟨c, ρ(γ)⟩,
/// with f̄ the trapezoidal average of f at each step's endpoints.
pub fn loop_action(metric: &ConformalMetric, c: CohomologyClass, lp: &DiscreteLoop) -> Result<f64> {
    let grid = metric.grid();
    lp.validate(grid)?;
    let n = grid.n() as f64;
    let h = lp.timestep;
    let mut kinetic = 0.0;
    for (i, node) in lp.nodes.iter().enumerate() {
        let d = lp.displacements[i];
        let next = grid.step(*node, d);
        let fbar = 0.5 * (metric.f(*node) + metric.f(next));
        let vx = d.dx as f64 / n / h;
        let vy = d.dy as f64 / n / h;
        kinetic += h * (0.5 * crate::math::exp(fbar) * (vx * vx + vy * vy));
    }
    Ok(kinetic - one_form_pairing(grid, c, lp)?)
}

/// The outcome of optimizing the traversal speed of a fixed loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedProfile {
    /// Action of the loop reparametrized to unit period (must be > 0).
    pub a: f64,
    /// One-form gain ⟨c, ρ(γ)⟩ over one period.
    pub b: f64,
    /// The minimizing speed factor s̄ = b/2a (0 when b ≤ 0).
    pub s_star: f64,
    /// The induced lower bound b²/4a on the critical value (0 when b ≤ 0).
    pub lower_bound: f64,
}

/// Minimize a s² − b s over traversal speeds s ≥ 0.
///
/// Errors with [`Error::NonpositiveAction`] unless a > 0; with b ≤ 0 the
/// minimum sits at rest (s̄ = 0) and yields the trivial bound 0.
pub fn optimal_speed(a: f64, b: f64) -> Result<SpeedProfile> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::NonFinite("optimal_speed inputs"));
    }
    if !(a > 0.0) {
        return Err(Error::NonpositiveAction);
    }
    if b <= 0.0 {
        return Ok(SpeedProfile {
            a,
            b,
            s_star: 0.0,
            lower_bound: 0.0,
        });
    }
    Ok(SpeedProfile {
        a,
        b,
        s_star: b / (2.0 * a),
        lower_bound: b * b / (4.0 * a),
    })
}

/// ⟨u, π_g μ⟩ = Σ_e μ(e) h_e u(tail e) |v_e|²: the pairing of a scalar field
/// with the flat-metric kinetic projection of an occupation measure.
///
/// |v_e| is the *flat* speed of the edge. The measure's atoms carry their
/// rate, duration and speed, so no graph is needed here; only the grids must
/// agree.
pub fn pairing(u: &ScalarField, mu: &OccupationMeasure) -> Result<f64> {
    if u.grid().n() != mu.grid_n() {
        return Err(Error::GridMismatch);
    }
    let grid = u.grid();
    let mut acc = 0.0;
    for atom in mu.atoms() {
        let mass = atom.rate * atom.h;
        acc += mass * u.value(grid.node(atom.tail)) * atom.speed_sq;
    }
    Ok(acc)
}
