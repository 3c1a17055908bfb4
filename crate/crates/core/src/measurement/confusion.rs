use std::collections::BTreeMap;

use nalgebra::DMatrix;
use crate::error::{Error, Result};

/// Condition number above which mitigation is refused.
pub const CONDITION_LIMIT: f64 = 1e3;

/// Default per-qubit symmetric readout flip probability for synthetic data.
pub const DEFAULT_FLIP: f64 = 0.02;

/// Column-stochastic readout map, `m[(i, j)] = P(read i | prepared j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    n_qubits: usize,
    m: DMatrix<f64>,
}

impl ConfusionMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let dim = m.nrows();
        if m.ncols() != dim || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidProbabilities(format!(
                "confusion matrix shape {}x{} is not a qubit register",
                m.nrows(),
                m.ncols()
            )));
        }
        for (j, col) in m.column_iter().enumerate() {
            if col.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::InvalidProbabilities(format!("column {j} has entries outside [0, 1]")));
            }
            let s: f64 = col.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidProbabilities(format!("column {j} sums to {s}")));
            }
        }
        Ok(Self { n_qubits: dim.trailing_zeros() as usize, m })
    }

    pub fn identity(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        Self { n_qubits, m: DMatrix::identity(dim, dim) }
    }

    /// Independent symmetric flips, one probability per qubit (qubit 0 is the
    /// leftmost Kronecker factor).
    pub fn from_flips(flips: &[f64]) -> Result<Self> {
        if flips.is_empty() {
            return Err(Error::Config("need at least one qubit".into()));
        }
        let mut m = DMatrix::from_element(1, 1, 1.0);
        for (q, &f) in flips.iter().enumerate() {
            if !(0.0..=0.5).contains(&f) {
                return Err(Error::Config(format!("flip probability {f} of qubit {q} not in [0, 0.5]")));
            }
            let single = DMatrix::from_row_slice(2, 2, &[1.0 - f, f, f, 1.0 - f]);
            m = m.kronecker(&single);
        }
        Self::new(m)
    }

    pub fn uniform(n_qubits: usize, flip: f64) -> Result<Self> {
        Self::from_flips(&vec![flip; n_qubits])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Ratio of extreme singular values; infinite when singular.
    pub fn condition_number(&self) -> f64 {
        let sv = self.m.clone().singular_values();
        let hi = sv.max();
        let lo = sv.min();
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }
}

/// `m * p`.
pub fn apply_confusion(true_probs: &[f64], m: &ConfusionMatrix) -> Result<Vec<f64>> {
    if true_probs.len() != m.dim() {
        return Err(Error::DimensionMismatch { expected: m.dim(), found: true_probs.len() });
    }
    Ok((0..m.dim())
        .map(|i| (0..m.dim()).map(|j| m.m[(i, j)] * true_probs[j]).sum())
        .collect())
}

/// Builds the confusion matrix from calibration runs. `prep_counts[j]` holds
/// the readout counts after preparing basis state `j`.
pub fn estimate_confusion(n_qubits: usize, prep_counts: &BTreeMap<usize, Vec<u64>>) -> Result<ConfusionMatrix> {
    let dim = 1usize << n_qubits;
    let missing: Vec<usize> = (0..dim)
        .filter(|j| prep_counts.get(j).is_none_or(|c| c.iter().sum::<u64>() == 0))
        .collect();
    if !missing.is_empty() {
        return Err(Error::IncompleteCalibration { missing });
    }
    let mut m = DMatrix::zeros(dim, dim);
    for (&j, counts) in prep_counts {
        if j >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: j + 1 });
        }
        if counts.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: counts.len() });
        }
        let total = counts.iter().sum::<u64>() as f64;
        for (i, &c) in counts.iter().enumerate() {
            m[(i, j)] = c as f64 / total;
        }
    }
    ConfusionMatrix::new(m)
}
