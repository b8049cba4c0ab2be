//! Scalar float helpers usable with and without `std`.
//!
//! With the default `std` feature these forward to the intrinsic `f64`
//! methods; without it they fall back to `libm`. Routing every transcendental
//! through here keeps the rest of the crate body oblivious to the build mode.
//! The two backends may differ in the last ulp, so reproducibility claims are
//! always per build, never across feature sets.

#[cfg(feature = "std")]
mod imp {
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
    #[inline]
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
    #[inline]
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }
    #[inline]
    pub fn sin(x: f64) -> f64 {
        x.sin()
    }
    #[inline]
    pub fn cos(x: f64) -> f64 {
        x.cos()
    }
}

#[cfg(not(feature = "std"))]
mod imp {
    #[inline]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
    #[inline]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    #[inline]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    #[inline]
    pub fn sin(x: f64) -> f64 {
        libm::sin(x)
    }
    #[inline]
    pub fn cos(x: f64) -> f64 {
        libm::cos(x)
    }
}

pub use imp::{cos, exp, ln, sin, sqrt};

/// Euclidean norm of a planar vector. Inputs here are O(1), so the naive
/// formula is fine (no overflow-guarding `hypot` needed).
#[inline]
pub fn norm2(x: f64, y: f64) -> f64 {
    sqrt(x * x + y * y)
}
