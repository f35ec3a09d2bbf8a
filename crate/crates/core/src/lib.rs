//! Spectral simulation of the relativistic quantum models that trapped ions
//! can emulate: free Dirac wavepackets and Zitterbewegung, Klein scattering
//! off a linear potential, Dirac-Landau levels through the Jaynes-Cummings
//! model, and a two-fermion bag model.
//!
//! Units are ħ = 1 throughout the simulation side. Conversions to laboratory
//! parameters live in [`ion`].

pub mod bag;
pub mod dirac;
pub mod error;
pub mod exec;
pub mod expm;
pub mod field;
pub mod grid;
pub mod klein;
pub mod landau;
pub mod ion;
pub mod pauli;
pub mod split;

pub use error::{Error, Result};
pub use exec::Execution;
pub use field::{Representation, SpinorField, SpinorField1D};
pub use grid::{make_grid, Grid1D};
pub use pauli::PauliCoeffs;

/// Complex scalar used for every amplitude.
pub type C64 = num_complex::Complex64;
