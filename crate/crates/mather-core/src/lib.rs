//! Numerical Aubry–Mather theory on the flat two-torus.
//!
//! The objects of study are mechanical lagrangians L(x, v) = ½ e^{f(x)} |v|²
//! on T² = R²/Z² — conformally flat kinetic energies — together with their
//! Mañé critical values α(c) for cohomology classes c ∈ H¹(T², R) ≅ R², the
//! c-minimizing (occupation) measures, and the Aubry set with its partition
//! into static classes.
//!
//! Everything is discretized on an n × n grid with a bounded velocity
//! stencil: curves become cycles in a weighted digraph, invariant measures
//! become divergence-free edge weights, and the critical value becomes the
//! smallest k ≥ 0 at which the Finsler-type weights
//!
//! ```text
//! w_k(e) = √(2k) · ℓ_f(e) − ⟨c, Δx_e⟩
//! ```
//!
//! admit no negative cycle (the Maupertuis/Mañé free-time reduction of
//! L − c + k). Minimizing measures are recovered from minimum mean cycles of
//! the timed graph, and the Aubry set from near-zero cycles of w_α.
//!
//! Module map:
//! - [`grid`]: torus geometry, stencils, conformal metrics, loops, homology.
//! - [`action`]: pointwise lagrangian samples, loop actions, speed scaling.
//! - [`alpha`]: the action graph, negative-cycle detection, critical values.
//! - [`measures`]: timed graphs, minimum mean cycles, occupation measures,
//!   the projected-mass separation test.
//! - [`aubry`]: Mañé potentials, Peierls barriers, Aubry sets, static classes.
//! - [`lab`]: conformal perturbations and full per-class experiment cells.
//! - [`exhaustive`]: brute-force reference computations for desk-size grids.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature; float math then routes through `libm`. All algorithms are
//! deterministic: fixed iteration orders, no hashing, no threads.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod action;
pub mod alpha;
pub mod aubry;
pub mod error;
pub mod exhaustive;
pub mod grid;
pub mod lab;
pub mod measures;
pub mod rng;

mod math;
mod paths;

pub use error::Error;

/// Convenience alias used by every fallible operation in the crate.
pub type Result<T> = core::result::Result<T, Error>;
