//! Trajectories of diamagnetic nanoparticles in the field of straight
//! current-carrying wires, and synthesis of wire layouts that split a
//! packet into two branches and recombine them at the launch point.
//!
//! Units are SI throughout the API. The CLI accepts lengths in μm.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod designer;
pub mod error;
pub mod field;
pub mod integrator;
pub mod model;
mod ode;
pub mod root;
pub mod sweep;

pub use designer::{design, design_inverse, design_triangular, Design, DesignSpec, Scheme};
pub use error::{Error, Result};
pub use field::{ForceLaw, WireField};
pub use integrator::{simulate, Control, Trajectory};
pub use model::{DesignResult, Medium, PacketState, ScatteringInputs, Wire};
