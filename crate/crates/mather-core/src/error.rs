//! Error type shared by every fallible operation in the crate.

use core::fmt;

/// Everything that can go wrong inside the core library.
///
/// Variants are deliberately coarse: they distinguish *caller mistakes*
/// (malformed loops, mismatched grids, out-of-domain parameters) from
/// *mathematical refusals* (no time assignment at α = 0, measures that cannot
/// be separated) and from the one *retryable* condition, [`Error::NeedsLargerAlpha`],
/// which signals that a shortest-path stage ran at a sub-critical level.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter failed validation; the message names the offending field.
    InvalidParameter(&'static str),
    /// A quantity that must be finite was NaN or infinite.
    NonFinite(&'static str),
    /// A discrete loop violated its structural invariants (closure,
    /// node/displacement consistency, or a non-positive timestep).
    MalformedLoop(&'static str),
    /// Two objects living on different grids were combined.
    GridMismatch,
    /// `optimal_speed` needs a strictly positive unit-period action.
    NonpositiveAction,
    /// Finsler weights are only defined for levels k ≥ 0.
    NegativeLevel,
    /// Per-edge-optimal times do not exist: α = 0 with a nonzero displacement
    /// (or an explicitly non-positive timestep was requested).
    DegenerateTime,
    /// A negative cycle survived at the requested level; the caller should
    /// retry with a level at or above the certified upper bracket end.
    NeedsLargerAlpha { k: f64 },
    /// A potential value was queried for a node that is not among the seeds.
    MissingSeed,
    /// `separation_test` was handed two copies of the same measure.
    IdenticalMeasures,
    /// `separation_test` was handed measures supported on the zero section,
    /// where the projected kinetic pairing cannot see anything.
    ZeroVelocitySupport,
    /// A conformal perturbation left the metric cone: 1 + 2u ≤ 0 somewhere.
    MetricConstraint,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::NonFinite(what) => write!(f, "non-finite value: {what}"),
            Error::MalformedLoop(what) => write!(f, "malformed loop: {what}"),
            Error::GridMismatch => write!(f, "objects live on different grids"),
            Error::NonpositiveAction => {
                write!(f, "unit-period action must be strictly positive")
            }
            Error::NegativeLevel => write!(f, "Finsler level k must be nonnegative"),
            Error::DegenerateTime => {
                write!(f, "no admissible time assignment (alpha = 0 with motion)")
            }
            Error::NeedsLargerAlpha { k } => {
                write!(f, "negative cycle at level k = {k}; retry above the bracket")
            }
            Error::MissingSeed => write!(f, "queried node is not a potential seed"),
            Error::IdenticalMeasures => {
                write!(f, "measures coincide edgewise; nothing to separate")
            }
            Error::ZeroVelocitySupport => {
                write!(f, "measures are supported on the zero section")
            }
            Error::MetricConstraint => {
                write!(f, "perturbation violates 1 + 2u > 0 on the grid")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
