//! Three-degree-of-freedom flight simulation of a lifting reentry vehicle:
//! standard atmosphere, point-mass dynamics with a fixed-step RK4 integrator,
//! a four-phase guidance machine with an infrared seeker model, and a
//! deterministic parallel Monte Carlo harness.

// Validation is written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod atmosphere;
pub mod dynamics;
pub mod error;
pub mod guidance;
pub mod montecarlo;
pub mod scenario;
pub mod seeker;

pub use error::{Error, Result};
