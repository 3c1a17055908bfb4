//! Quantum data types, Hamiltonians and the GKSL generator.
//!
//! Time is in microseconds and angular frequency in rad/us throughout.

pub mod density;
pub mod hamiltonian;
pub mod lindblad;
pub mod noise;
pub mod operators;

pub use density::DensityMatrix;
pub use hamiltonian::{build_hamiltonian, CouplingMatrix, FrequencyVector, HamiltonianMode, HamiltonianSpec};
pub use lindblad::{lindblad_rhs, Lindbladian};
pub use noise::{thermal_photon_number, NoiseSpec, ThermalRates};
pub use operators::CMatrix;
