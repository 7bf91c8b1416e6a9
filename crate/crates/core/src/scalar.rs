//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type the solvers are generic over: `f32` or `f64`.
///
/// Tolerances are part of the type because a single absolute threshold
/// cannot serve both precisions.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Absolute tolerance for utility comparisons and strictness tests.
    fn tolerance() -> Self;

    /// Pivot and feasibility tolerance used by the simplex solver.
    fn lp_tolerance() -> Self;

    /// Tolerance used when deciding LP-based verdicts (blocking `t* > tol`).
    fn verdict_tolerance() -> Self;
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }

    fn lp_tolerance() -> Self {
        1e-10
    }

    fn verdict_tolerance() -> Self {
        1e-7
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }

    fn lp_tolerance() -> Self {
        1e-6
    }

    fn verdict_tolerance() -> Self {
        1e-4
    }
}

/// Converts an `f64` literal into `S`.
#[inline]
pub fn lit<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a count into `S`.
#[inline]
pub fn count<S: Scalar>(x: usize) -> S {
    S::from_usize(x).expect("count representable in scalar type")
}

/// Lossy conversion back to `f64`, used for RNG draws and reporting.
#[inline]
pub fn to_f64<S: Scalar>(x: S) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}
