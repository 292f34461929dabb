//! Quantum Fisher information of single-particle and interacting Stark probes
//! with exponentially graded potentials `V_j = e^{a j}`.

pub mod bound;
pub mod dynamic;
pub mod equilibrium;
pub mod error;
pub mod grid;
pub mod matrix;
pub mod model;
pub mod scaling;
pub mod spectral;

pub use error::{Error, Result};
