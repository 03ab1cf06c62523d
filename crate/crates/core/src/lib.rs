//! Local integral-geometric invariants of conic germs.

pub mod cli;
pub mod config;
pub mod euler;
pub mod error;
pub mod feasibility;
pub mod geometry;
pub mod invariants;
pub mod oracle;
mod linalg;
pub mod sampling;
pub mod scene_io;
pub mod verify;

pub use config::{Config, LimitMode};
pub use error::{Error, Result};
pub use scene_io::{parse_scene, Scene};
pub use verify::{verify, verify_all, Law, VerificationReport, Verdict};
