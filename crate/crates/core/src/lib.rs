//! Simulation and spectral analysis of adiabatic quantum computation on
//! satisfiability instances.

pub mod eigen;
pub mod error;
pub mod evolution;
pub mod hamiltonian;
pub mod instance;
pub mod operator;
mod par;
pub mod reduction;
pub mod ring;
pub mod spectrum;
pub mod trotter;

pub use error::{Error, Result};
