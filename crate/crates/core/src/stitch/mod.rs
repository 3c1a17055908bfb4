//! Cross-checks between overlapping subsystem fits, and assembly of a larger
//! chain from them.

mod composite;
mod consistency;
pub mod tables;

use serde::{Deserialize, Serialize};

use crate::calibrate::{FitResult, ParameterSet, Slot};
use crate::error::{Error, Result};

pub use composite::{predict_composite, predict_composite_with, Combine};
pub use consistency::{consistency_check, ConsistencyReport, Estimate, Symbol, SymbolRow, Target, Thresholds};

/// A fit over a contiguous run of device qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsystemFit {
    pub qubit_indices: Vec<usize>,
    pub result: FitResult,
}

impl SubsystemFit {
    pub fn new(result: FitResult) -> Result<Self> {
        let fit = Self { qubit_indices: result.qubits.clone(), result };
        fit.validate()?;
        Ok(fit)
    }

    pub fn validate(&self) -> Result<()> {
        let q = &self.qubit_indices;
        if q.is_empty() || q.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::Config(format!("subsystem qubits {q:?} are not a contiguous ascending run")));
        }
        if q.len() != self.result.best_params.layout.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.result.best_params.layout.n_qubits, found: q.len() });
        }
        Ok(())
    }

    /// Short name such as `2q[0,1]`.
    pub fn label(&self) -> String {
        let list: Vec<String> = self.qubit_indices.iter().map(|q| q.to_string()).collect();
        format!("{}q[{}]", self.qubit_indices.len(), list.join(","))
    }

    pub fn contains(&self, qubit: usize) -> bool {
        self.qubit_indices.contains(&qubit)
    }

    pub(crate) fn local(&self, qubit: usize) -> Option<usize> {
        self.qubit_indices.iter().position(|&q| q == qubit)
    }

    /// Local pair index of device pair `(a, a + 1)`.
    pub(crate) fn local_pair(&self, a: usize) -> Option<usize> {
        let i = self.local(a)?;
        self.contains(a + 1).then_some(i)
    }

    pub(crate) fn params(&self) -> ParameterSet {
        self.result.best_params.unpack()
    }

    /// Whether any slot selected by `pick` moved during the fit.
    pub(crate) fn fitted(&self, pick: impl Fn(&Slot) -> bool) -> bool {
        self.result
            .best_params
            .layout
            .slots()
            .iter()
            .filter(|s| pick(s))
            .any(|s| !self.result.frozen.contains(&s.to_string()))
    }
}
