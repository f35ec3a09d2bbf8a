//! Dirac particle in a magnetic field through the detuned Jaynes-Cummings
//! model: Landau spectrum and eigenstates, spinor Wigner functions,
//! pseudospin textures, their topological charge, and the two noise
//! channels (dephasing, spontaneous emission).

mod channels;
mod hermite;
mod jc;
mod pseudospin;
mod wigner;
mod winding;

pub use channels::{amplitude_damping, dephasing_channel, SpinOscillatorState};
pub use hermite::{hermite_function, hermite_functions, HERMITE_MAX_ORDER};
pub use jc::{
    jc_hamiltonian, landau_eigenstate, landau_energy, landau_fock_state, Branch, JCParams, LandauConvention,
};
pub use pseudospin::{dephasing_map, pseudospin_field, PseudospinField, Threshold};
pub use wigner::{
    fock_wigner_kernel, wigner_from_density, wigner_from_density_with, wigner_spinor, wigner_spinor_with, Lattice,
    PhaseSpaceGrid, WignerField,
};
pub use winding::{winding_number, winding_number_with, WindingReport, COMPACTIFICATION_TOLERANCE};
