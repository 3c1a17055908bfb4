//! Open-system simulation and calibration of linear transmon chains.
//!
//! [`qdyn`] builds chain Hamiltonians and thermal Lindblad generators,
//! [`propagator`] runs the delay-sweep circuits, [`measurement`] turns
//! populations into shot-sampled records and undoes readout confusion,
//! [`calibrate`] fits parameters to records with Adam, and [`stitch`]
//! cross-checks overlapping subsystem fits and assembles larger chains.

pub mod calibrate;
pub mod error;
pub mod measurement;
pub mod propagator;
pub mod qdyn;
pub mod stitch;

pub use calibrate::{FitConfig, FitResult, ParameterSet, ParameterVector, Slot};
pub use error::{Error, Result};
pub use measurement::{ConfusionMatrix, ExperimentRecord};
pub use propagator::{ExperimentKind, TimeGrid, Trajectory};
pub use qdyn::{CouplingMatrix, DensityMatrix, FrequencyVector, HamiltonianMode, HamiltonianSpec, NoiseSpec};
pub use stitch::{ConsistencyReport, SubsystemFit, Thresholds};
