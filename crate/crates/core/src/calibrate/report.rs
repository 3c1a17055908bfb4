use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::params::{ParameterSet, ParameterVector};
use crate::error::Result;

/// Per-qubit quantities in the units of the device tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitReport {
    pub qubit: usize,
    pub omega_rad_per_ns: f64,
    pub gamma_per_us: f64,
    pub photon_number: f64,
    pub t1_us: f64,
    pub temperature_mk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub qubits: (usize, usize),
    pub j_rad_per_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DerivedReport {
    pub qubits: Vec<QubitReport>,
    pub couplings: Vec<CouplingReport>,
}

impl DerivedReport {
    /// `device_qubits[i]` is the device index of register qubit `i`.
    pub fn from_set(set: &ParameterSet, device_qubits: &[usize]) -> Result<Self> {
        let qubits = (0..set.n_qubits())
            .map(|q| {
                let n = set.photon_number(q)?;
                Ok(QubitReport {
                    qubit: device_qubits[q],
                    omega_rad_per_ns: set.freqs[q].norm() * 1e-3,
                    gamma_per_us: set.gamma[q],
                    photon_number: n,
                    t1_us: 1.0 / (set.gamma[q] * (2.0 * n + 1.0)),
                    temperature_mk: set.temperature(q) * 1e3,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let couplings = set
            .couplings
            .iter()
            .enumerate()
            .map(|(p, j)| CouplingReport {
                qubits: (device_qubits[p], device_qubits[p + 1]),
                j_rad_per_ns: j.effective_strength() * 1e-3,
            })
            .collect();
        Ok(Self { qubits, couplings })
    }

    pub fn from_vector(v: &ParameterVector, device_qubits: &[usize]) -> Result<Self> {
        Self::from_set(&v.unpack(), device_qubits)
    }

    /// Claimed-versus-fitted table. Without `claimed` only the fitted
    /// columns are shown.
    pub fn render(&self, claimed: Option<&DerivedReport>) -> String {
        let mut out = String::new();
        let _ = match claimed {
            Some(_) => writeln!(
                out,
                "{:<6} {:>12} {:>12} {:>12} {:>12} {:>12} {:>12}",
                "qubit", "w claimed", "w fit", "T1 claimed", "T1 fit", "T claimed", "T fit"
            ),
            None => writeln!(out, "{:<6} {:>12} {:>12} {:>12}", "qubit", "w", "T1", "T"),
        };
        let _ = writeln!(out, "{:<6} {:>12} {:>12} {:>12}", "", "(rad/ns)", "(us)", "(mK)");
        for q in &self.qubits {
            match claimed.and_then(|c| c.qubits.iter().find(|c| c.qubit == q.qubit)) {
                Some(c) => {
                    let _ = writeln!(
                        out,
                        "q{:<5} {:>12.4} {:>12.4} {:>12.2} {:>12.2} {:>12.2} {:>12.2}",
                        q.qubit, c.omega_rad_per_ns, q.omega_rad_per_ns, c.t1_us, q.t1_us, c.temperature_mk, q.temperature_mk
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        "q{:<5} {:>12.4} {:>12.2} {:>12.2}",
                        q.qubit, q.omega_rad_per_ns, q.t1_us, q.temperature_mk
                    );
                }
            }
        }
        for j in &self.couplings {
            let label = format!("J{}{}", j.qubits.0, j.qubits.1);
            match claimed.and_then(|c| c.couplings.iter().find(|c| c.qubits == j.qubits)) {
                Some(c) => {
                    let _ = writeln!(out, "{label:<6} {:>12.3e} {:>12.3e}  (rad/ns)", c.j_rad_per_ns, j.j_rad_per_ns);
                }
                None => {
                    let _ = writeln!(out, "{label:<6} {:>12.3e}  (rad/ns)", j.j_rad_per_ns);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedParameter {
    pub name: String,
    pub value: f64,
    pub unit: String,
}

/// Outcome of [`adam_fit`](super::adam_fit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Device qubits covered by the fitted records.
    pub qubits: Vec<usize>,
    pub best_params: ParameterVector,
    pub parameters: Vec<NamedParameter>,
    pub loss: f64,
    pub loss_history: Vec<f64>,
    /// Best loss at the end of each restart.
    pub restart_losses: Vec<f64>,
    pub iterations_used: usize,
    pub restarts_used: usize,
    /// Slots held fixed during the fit.
    pub frozen: Vec<String>,
    /// Slots whose gradient failed the step-halving check at the optimum.
    pub flagged_gradient: Vec<String>,
    pub derived: DerivedReport,
}

impl FitResult {
    pub fn named_parameters(v: &ParameterVector) -> Vec<NamedParameter> {
        v.named()
            .into_iter()
            .map(|(name, value, unit)| NamedParameter { name, value, unit: unit.to_string() })
            .collect()
    }

    /// A result known only by its parameters, with no optimizer history.
    pub fn from_parameters(qubits: Vec<usize>, params: ParameterVector, loss: f64, frozen: Vec<String>) -> Result<Self> {
        if qubits.len() != params.layout.n_qubits {
            return Err(crate::Error::DimensionMismatch { expected: params.layout.n_qubits, found: qubits.len() });
        }
        Ok(Self {
            derived: DerivedReport::from_vector(&params, &qubits)?,
            parameters: Self::named_parameters(&params),
            qubits,
            best_params: params,
            loss,
            loss_history: Vec::new(),
            restart_losses: Vec::new(),
            iterations_used: 0,
            restarts_used: 0,
            frozen,
            flagged_gradient: Vec::new(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text)?;
        if r.best_params.values.len() != r.best_params.layout.len() {
            return Err(crate::Error::DimensionMismatch {
                expected: r.best_params.layout.len(),
                found: r.best_params.values.len(),
            });
        }
        Ok(r)
    }

    pub fn frozen_slots(&self) -> &[String] {
        &self.frozen
    }
}
