//! Cross-validation of the production solvers against frozen closed-form
//! values and the brute-force oracles.
//!
//! Closed forms used here (all for L = ½ e^f |v|² on the unit torus):
//! - flat metric: α(c) = |c|²/2 in the continuum; the discrete value matches
//!   whenever the stencil contains a stride parallel to c.
//! - single-row optimum: if f depends only on x₂ with its minimum f* on a
//!   grid row, the best cycle for c = (1,0) is that row, with Finsler speed
//!   ratio (1/e^{f*/2})²/2, i.e. α = e^{−f*}/2.
//! - 2-homogeneity: α(t·c) = t²·α(c) for every t (the discrete value is a
//!   max of squared linear functionals over cycles).

use mather_core::alpha::{
    critical_value, has_negative_cycle, ActionGraph, CriticalValueParams,
};
use mather_core::aubry::{aubry_set, mane_potential, DEFAULT_AUBRY_EPS};
use mather_core::exhaustive::{apsp_minplus, negative_cycle_exhaustive, simple_cycles};
use mather_core::grid::{
    build_metric, CohomologyClass, FourierMode, GaussianBump, MetricSpec, Node, TorusGrid,
    VelocityStencil,
};
use mather_core::lab::trial_metric;

fn graph(metric_spec: &MetricSpec, n: usize, radius: i32, c: (f64, f64)) -> ActionGraph {
    let grid = TorusGrid::new(n).unwrap();
    let metric = build_metric(metric_spec, grid).unwrap();
    let stencil = VelocityStencil::disc(radius).unwrap();
    ActionGraph::build(&metric, &stencil, CohomologyClass::new(c.0, c.1)).unwrap()
}

#[test]
fn flat_alpha_attains_the_continuum_on_axis_and_diagonal() {
    // the bisected value sits within bisection-tolerance + one certification
    // threshold of the exact transition (certification biases the bracket
    // down by at most ε_cycle in cycle cost, ≈ ε_cycle in k near k = α)
    let g = graph(&MetricSpec::Flat, 16, 2, (1.0, 0.0));
    let r = critical_value(&g, CriticalValueParams::default()).unwrap();
    assert!(
        (r.alpha - 0.5).abs() < r.eps_cycle + 2e-9,
        "axis alpha {}",
        r.alpha
    );

    let g = graph(&MetricSpec::Flat, 16, 2, (1.0, 1.0));
    let r = critical_value(&g, CriticalValueParams::default()).unwrap();
    assert!(
        (r.alpha - 1.0).abs() < 2.0 * r.eps_cycle + 2e-9,
        "diagonal alpha {}",
        r.alpha
    );
}

#[test]
fn single_row_metric_alpha_is_exponential_in_the_well_depth() {
    // f = 0.05 sin(2πx₂), minimum −0.05 on the on-grid row x₂ = 3/4:
    // α = e^{0.05}/2. The value must be stencil-independent (radius 1..3),
    // since longer strides inside one row scale length and pairing together.
    let spec = MetricSpec::Fourier(vec![FourierMode {
        mx: 0,
        my: 1,
        amplitude: 0.05,
        phase: 0.0,
    }]);
    let expect = (0.05f64).exp() / 2.0;
    for radius in 1..=3 {
        let g = graph(&spec, 8, radius, (1.0, 0.0));
        let r = critical_value(&g, CriticalValueParams::default()).unwrap();
        assert!(
            (r.alpha - expect).abs() < 2.0 * r.eps_cycle + 2e-9,
            "radius {radius}: alpha {} vs {expect}",
            r.alpha
        );
    }
}

#[test]
fn alpha_is_two_homogeneous_in_the_class() {
    let spec = MetricSpec::Bumps(vec![
        GaussianBump {
            cx: 0.3,
            cy: 0.6,
            amplitude: 0.09,
            width: 0.14,
        },
        GaussianBump {
            cx: 0.8,
            cy: 0.2,
            amplitude: -0.07,
            width: 0.11,
        },
    ]);
    for c in [(1.0, 0.0), (0.6, 0.8), (-0.5, 1.1)] {
        let a1 = critical_value(&graph(&spec, 12, 2, c), CriticalValueParams::default())
            .unwrap()
            .alpha;
        let a2 = critical_value(
            &graph(&spec, 12, 2, (2.0 * c.0, 2.0 * c.1)),
            CriticalValueParams::default(),
        )
        .unwrap()
        .alpha;
        assert!(
            (a2 - 4.0 * a1).abs() < 1e-7,
            "c = {c:?}: alpha(2c) = {a2}, 4·alpha(c) = {}",
            4.0 * a1
        );
    }
}

#[test]
fn detector_agrees_with_exhaustive_enumeration_across_levels() {
    // n = 4 keeps brute force honest; probe a fan of levels through the
    // critical point on a rough random metric. Near the certification
    // boundary (|min cycle + ε| small) both answers are legitimate, so the
    // comparison applies margins of one ε on each side.
    let grid = TorusGrid::new(4).unwrap();
    let metric = trial_metric(&MetricSpec::Flat, grid, 0.1, 3, 2024, 0).unwrap();
    let stencil = VelocityStencil::disc(1).unwrap();
    for c in [(1.0, 0.0), (0.7, -0.7)] {
        let g = ActionGraph::build(&metric, &stencil, CohomologyClass::new(c.0, c.1)).unwrap();
        let eps = g.default_cycle_eps();
        for i in 0..=12 {
            let k = 0.05 * i as f64;
            let (worst, _) = negative_cycle_exhaustive(&g, k).unwrap();
            let det = has_negative_cycle(&g, k, eps).unwrap();
            if worst < -2.0 * eps {
                assert!(det.is_some(), "k = {k}: oracle {worst} but no witness");
                let w = det.unwrap();
                assert!(w.cost < -eps);
                // the witness must re-certify against the raw graph
                assert!((g.cycle_cost(&w.edges, k) - w.cost).abs() < 1e-12);
            } else if worst > -0.5 * eps {
                assert!(det.is_none(), "k = {k}: oracle {worst} yet witness found");
            }
        }
    }
}

#[test]
fn bisected_alpha_brackets_the_exhaustive_transition() {
    // The exhaustive worst cycle cost is continuous and increasing in k;
    // the bisected bracket must straddle its zero crossing.
    let grid = TorusGrid::new(4).unwrap();
    let metric = trial_metric(&MetricSpec::Flat, grid, 0.08, 2, 77, 1).unwrap();
    let stencil = VelocityStencil::disc(1).unwrap();
    let g = ActionGraph::build(&metric, &stencil, CohomologyClass::new(1.0, 0.2)).unwrap();
    let r = critical_value(&g, CriticalValueParams::default()).unwrap();
    let (below, _) = negative_cycle_exhaustive(&g, (r.bracket.0 - 1e-6).max(0.0)).unwrap();
    let (above, _) = negative_cycle_exhaustive(&g, r.bracket.1 + 1e-6).unwrap();
    assert!(below < 0.0, "no negativity just below the bracket: {below}");
    assert!(above >= -g.default_cycle_eps(), "negativity above: {above}");
}

#[test]
fn mane_potential_matches_minplus_closure_on_perturbed_metric() {
    let grid = TorusGrid::new(4).unwrap();
    let metric = trial_metric(&MetricSpec::Flat, grid, 0.07, 2, 5, 4).unwrap();
    let stencil = VelocityStencil::disc(1).unwrap();
    let g = ActionGraph::build(&metric, &stencil, CohomologyClass::new(1.0, 0.0)).unwrap();
    let cv = critical_value(&g, CriticalValueParams::default()).unwrap();
    let k = cv.bracket.1;
    let seeds: Vec<usize> = (0..g.node_count()).collect();
    let field = mane_potential(&g, k, &seeds).unwrap();
    let apsp = apsp_minplus(&g, k).unwrap();
    let v = g.node_count();
    for s in 0..v {
        for x in 0..v {
            let a = apsp[s * v + x];
            let b = field.value(s, x).unwrap();
            assert!(
                (a - b).abs() <= 1e-12,
                "phi({s},{x}): closure {a} vs solver {b}"
            );
        }
    }
}

#[test]
fn flat_potential_to_the_backward_neighbor_rides_the_wraparound() {
    // For c = (1,0) at k = α the +x edges cost nothing, so the potential to
    // the (−1, 0) neighbor is 0 — the n−1 zero-cost steps the long way
    // around — not the 2Δ a two-step backtrack would suggest. The min-plus
    // closure (an independent path algebra) pins the same value.
    let g = graph(&MetricSpec::Flat, 8, 1, (1.0, 0.0));
    let grid = g.grid();
    let seed = grid.index(Node::new(0, 0));
    let back = grid.index(Node::new(7, 0));
    let field = mane_potential(&g, 0.5, &[seed]).unwrap();
    assert!(field.value(seed, back).unwrap().abs() <= 1e-12);
    let apsp = apsp_minplus(&g, 0.5).unwrap();
    assert!(apsp[seed * g.node_count() + back].abs() <= 1e-12);
}

#[test]
fn aubry_membership_matches_brute_force_cycle_scan() {
    // A node is ε-Aubry iff some moving simple cycle through it has
    // w_k-cost ≤ ε. The production path (potentials + pruned Dijkstra)
    // must reproduce the brute-force scan exactly on a small instance.
    let grid = TorusGrid::new(4).unwrap();
    let metric = trial_metric(&MetricSpec::Flat, grid, 0.09, 3, 31, 2).unwrap();
    let stencil = VelocityStencil::disc(1).unwrap();
    let g = ActionGraph::build(&metric, &stencil, CohomologyClass::new(1.0, -0.3)).unwrap();
    let cv = critical_value(&g, CriticalValueParams::default()).unwrap();
    let k = cv.bracket.1;
    let set = aubry_set(&g, k, DEFAULT_AUBRY_EPS).unwrap();

    let mut brute = vec![false; g.node_count()];
    for cy in simple_cycles(&g).unwrap() {
        if cy.len() == 1 && g.tail(cy[0]) == g.head(cy[0]) {
            continue;
        }
        if g.cycle_cost(&cy, k) <= DEFAULT_AUBRY_EPS {
            for &e in &cy {
                brute[g.tail(e)] = true;
            }
        }
    }
    let brute_members: Vec<usize> = (0..g.node_count()).filter(|&x| brute[x]).collect();
    assert_eq!(set.members, brute_members);
}

#[test]
fn exhaustive_min_mean_matches_production_on_random_metrics() {
    // criterion-7 style: same canonical arithmetic, so equality is exact
    use mather_core::measures::{assign_times, min_mean_cycle, TimeAssignment};
    let grid = TorusGrid::new(4).unwrap();
    let stencil = VelocityStencil::disc(1).unwrap();
    for trial in 0..3u64 {
        let metric = trial_metric(&MetricSpec::Flat, grid, 0.1, 3, 404, trial).unwrap();
        for c in [(1.0, 0.0), (1.0, 1.0)] {
            let g = ActionGraph::build(&metric, &stencil, CohomologyClass::new(c.0, c.1)).unwrap();
            let cv = critical_value(&g, CriticalValueParams::default()).unwrap();
            let tg = assign_times(&g, TimeAssignment::EnergyLevel { alpha: cv.alpha }).unwrap();
            let fast = min_mean_cycle(&tg).unwrap();
            let (oracle, _) = mather_core::exhaustive::min_mean_exhaustive(&tg).unwrap();
            assert_eq!(
                fast.mean.to_bits(),
                oracle.mean.to_bits(),
                "trial {trial} c {c:?}: {} vs {}",
                fast.mean,
                oracle.mean
            );
        }
    }
}
