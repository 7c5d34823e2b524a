//! Numerical laboratory for periodically driven disordered chains.
//!
//! The crate builds driven Ising and Bose-Hubbard Hamiltonians, integrates
//! one drive period into a Floquet operator, diagonalizes it and compares
//! level statistics, eigenvector statistics and output distributions with
//! circular-ensemble predictions. A separate module maps symmetric random
//! circuits onto complex-weighted Ising models and checks the mapping against
//! a state-vector simulator.

pub mod circuit;
pub mod ensemble;
pub mod error;
pub mod floquet;
pub mod hilbert;
pub mod linalg;
pub mod models;
pub mod quad;
pub mod rmt;
pub mod seed;
pub mod special;
pub mod stats;

pub use circuit::{Circuit, Gate, IsingGraph};
pub use error::{Error, Result};
pub use floquet::{FloquetSpectrum, SplitScheme};
pub use hilbert::{BasisKind, FockBasis};
pub use linalg::{CMatrix, Complex64};
pub use models::{DriveEnvelope, DrivenModel, ModelKind, ModelParams};
pub use rmt::ReferenceDensity;
pub use seed::seed_stream;
pub use stats::{Histogram, SpectralSample};
