//! Delay-sweep simulation: integration of the master equation and the gate
//! layers of each experiment circuit.

pub mod evolve;
pub mod experiment;
pub mod gates;
pub mod grid;

pub use evolve::{evolve, evolve_with, populations, run_experiment, run_experiment_with, Integrator, Trajectory};
pub use experiment::{Circuit, ExperimentKind};
pub use gates::{GateLabel, GateOp};
pub use grid::TimeGrid;
