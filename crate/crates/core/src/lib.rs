//! Convex-geometry toolkit for the Lipkin-Meshkov-Glick model: exact
//! quasi-spin ground states, small-register circuit simulation with
//! amplitude damping, Pauli tomography of the order parameters, and
//! convex-hull analysis of the resulting 2-RDM set.

pub mod circuits;
pub mod error;
pub mod hull;
pub mod lmg;
pub mod pauli;
pub mod seeds;
pub mod sim;
pub mod tomography;
pub mod trajectory;

pub use error::{Error, Result};
