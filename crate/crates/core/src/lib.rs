//! Quantum graphs: bond scattering, κ-spectra, eigenvector entropies and
//! entropic lower bounds.

pub mod bounds;
pub mod ensemble;
pub mod entropy;
pub mod error;
pub mod evolution;
pub mod graph;
pub mod linalg;
pub mod scattering;
pub mod spectrum;
pub mod star;

pub use error::{Error, Result};
