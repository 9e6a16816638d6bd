//! Exact diagonalization toolkit for two-qubit Rabi-type models with
//! finite-photon dark states.

pub mod cli;
pub mod darkstates;
pub mod error;
pub mod fockalg;
pub mod models;
pub mod spectra;
pub mod symmetry;

pub use error::{Error, Result};
