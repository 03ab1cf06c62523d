//! Sphere constants and Monte Carlo estimators of the local invariants.

pub mod constants;
mod estimators;

pub use constants::*;
pub use estimators::*;
