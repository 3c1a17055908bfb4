//! Fixtures shared by the benchmarks: the published three-qubit device and
//! shot-sampled records over its leading qubits.

use lindblad_calib::calibrate::ParameterSet;
use lindblad_calib::measurement::{synthesize_record, Acquisition, ExperimentRecord};
use lindblad_calib::propagator::{ExperimentKind, TimeGrid};

pub fn device(n: usize) -> ParameterSet {
    ParameterSet::from_device(
        &[31_420.0, 30_470.0, 30_050.0][..n],
        &[100.24, 106.95, 101.45][..n],
        &[47.96e-3, 54.20e-3, 50.30e-3][..n],
        &[8.31, 7.42][..n - 1],
    )
    .expect("valid device")
}

pub fn record(kind: ExperimentKind, n: usize, seed: u64) -> ExperimentRecord {
    let (spec, noise) = device(n).to_specs().expect("valid specs");
    let acq = Acquisition { shots: 8192, seed, confusion: None };
    synthesize_record(kind, &spec, &noise, &TimeGrid::default(), (0..n).collect(), &acq).expect("record")
}
