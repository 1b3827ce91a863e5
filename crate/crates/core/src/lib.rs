//! Numerical laboratory for entanglement-induced barren plateaus.
//!
//! The crate builds two quantum neural network models
//! (a parameterized unitary network and a quantum Boltzmann machine),
//! samples the random ensembles used to probe them, and drives the Monte
//! Carlo experiments that measure how close visible marginals sit to the
//! maximally mixed state and how gradient magnitudes decay with the number
//! of hidden qubits.
//!
//! All dense linear algebra lives in [`linalg`]; everything else is built on
//! top of [`linalg::ComplexMatrix`] and plain `Vec<Complex64>` state vectors.

pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod gradients;
pub mod linalg;
pub mod models;

pub use error::{Error, Result};
pub use linalg::{BipartiteDims, ComplexMatrix, Spectrum};
pub use num_complex::Complex64;
