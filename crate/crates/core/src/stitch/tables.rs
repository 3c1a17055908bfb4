//! Published claimed and fitted values for qubits 0 to 2 of a five-qubit
//! device, as canned subsystem fits.
//!
//! Frequencies and couplings are listed in rad/ns, T1 in us, temperatures in
//! mK. The frequencies of every fit are marked as held, matching relaxation
//! sweeps that cannot see them. In the three-qubit fit the couplings equal
//! the claimed values, so [`CouplingMode::Held`] marks them held and
//! [`CouplingMode::Refit`] treats them as fitted.

use serde::{Deserialize, Serialize};

use super::SubsystemFit;
use crate::calibrate::{FitResult, ParameterSet, ParameterVector};
use crate::error::Result;

pub const CLAIMED_OMEGA_RAD_PER_NS: [f64; 3] = [31.42, 30.47, 30.05];
pub const CLAIMED_T1_US: [f64; 3] = [100.24, 106.95, 101.45];
pub const CLAIMED_J_RAD_PER_NS: [f64; 2] = [8.31e-3, 7.42e-3];

/// Single-qubit fits: (T1, T).
pub const SINGLE: [(f64, f64); 3] = [(101.23, 47.96), (108.31, 54.20), (105.92, 50.30)];
/// Pair fits on (0, 1) and (1, 2): T1 and T per qubit, then J.
pub const PAIRS: [([(f64, f64); 2], f64); 2] = [
    ([(96.49, 6.62), (109.62, 65.55)], 5.87e-3),
    ([(109.26, 73.63), (108.31, 6.42)], 5.25e-3),
];
/// Three-qubit fit: T1 and T per qubit, then J for both pairs.
pub const TRIPLE: ([(f64, f64); 3], [f64; 2]) = ([(98.16, 50.59), (117.77, 67.92), (108.08, 6.37)], [8.31e-3, 7.42e-3]);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    Held,
    Refit,
}

fn canned(first: usize, t1_t: &[(f64, f64)], js: &[f64], hold_j: bool) -> Result<SubsystemFit> {
    let n = t1_t.len();
    let qubits: Vec<usize> = (first..first + n).collect();
    let omegas: Vec<f64> = qubits.iter().map(|&q| CLAIMED_OMEGA_RAD_PER_NS[q] * 1e3).collect();
    let t1: Vec<f64> = t1_t.iter().map(|p| p.0).collect();
    let temps: Vec<f64> = t1_t.iter().map(|p| p.1 * 1e-3).collect();
    let js: Vec<f64> = js.iter().map(|j| j * 1e3).collect();
    let params = ParameterVector::pack(&ParameterSet::from_device(&omegas, &t1, &temps, &js)?)?;
    let mut frozen: Vec<String> = (0..n).map(|q| format!("omega_z[{q}]")).collect();
    if hold_j {
        frozen.extend((0..n - 1).map(|p| format!("j[{p}]")));
    }
    // The published tables give no per-fit loss.
    SubsystemFit::new(FitResult::from_parameters(qubits, params, 0.0, frozen)?)
}

/// Fits in table order: three single-qubit fits, two pair fits, one
/// three-qubit fit.
pub fn table_fits(coupling: CouplingMode) -> Result<Vec<SubsystemFit>> {
    let mut fits = Vec::with_capacity(6);
    for (q, &st) in SINGLE.iter().enumerate() {
        fits.push(canned(q, &[st], &[], false)?);
    }
    for (a, (st, j)) in PAIRS.iter().enumerate() {
        fits.push(canned(a, st, &[*j], false)?);
    }
    fits.push(canned(0, &TRIPLE.0, &TRIPLE.1, coupling == CouplingMode::Held)?);
    Ok(fits)
}

/// Claimed values of qubits `first..first + n` as a parameter set, with the
/// given temperature (K) on every qubit.
pub fn claimed_set(first: usize, n: usize, temperature_k: f64) -> Result<ParameterSet> {
    let q = first..first + n;
    let omegas: Vec<f64> = q.clone().map(|i| CLAIMED_OMEGA_RAD_PER_NS[i] * 1e3).collect();
    let t1: Vec<f64> = q.clone().map(|i| CLAIMED_T1_US[i]).collect();
    let js: Vec<f64> = (first..first + n - 1).map(|p| CLAIMED_J_RAD_PER_NS[p] * 1e3).collect();
    ParameterSet::from_device(&omegas, &t1, &vec![temperature_k; n], &js)
}
