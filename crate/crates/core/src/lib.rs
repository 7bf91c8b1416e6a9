//! Approximate core outcomes for public goods under matroid, matching and
//! packing constraints, with an exhaustive verifier for small instances.
//!
//! Every numeric routine is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`.

pub mod caps;
pub mod endowment;
pub mod error;
pub mod fractional;
pub mod harness;
pub mod instance;
pub mod matching;
pub mod matroid;
pub mod objective;
pub mod report;
pub mod rounding;
pub mod scalar;
pub mod verifier;

pub use caps::SizeCaps;
pub use error::{CoreError, Result};
pub use instance::{ConstraintSpec, FractionalOutcome, Instance, IntegralOutcome, OptimumMode, Outcome};
pub use scalar::Scalar;

pub type Instance64 = Instance<f64>;
pub type Instance32 = Instance<f32>;
pub type Constraint64 = ConstraintSpec<f64>;
pub type Fractional64 = FractionalOutcome<f64>;
pub type Report64 = report::SolverReport<f64>;
pub type Certificate64 = verifier::CoreCertificate<f64>;
