//! Two-link microswimmers under resistive force theory.
//!
//! The crate assembles the grand resistance matrix for each swimmer model,
//! turns it into the control vector fields of a driftless system on
//! shape × SE(2), evaluates Lie brackets of those fields, certifies gait
//! controllability from bracket determinants and integrates gaits with RK4.

pub mod error;
pub mod export;
pub mod gaits;
pub mod lie;
pub mod models;
pub mod se2;
pub mod sim;
pub mod sweep;

pub use error::{Error, Result};
pub use gaits::ControlSignal;
pub use lie::{BracketSpec, Certificate, Method};
pub use models::{DragPair, ModelId, ModelParams, ShapeVector};
pub use se2::{Pose, Twist};
pub use sim::{IntegratorConfig, State, Trajectory};
