//! Readout mitigation as a least-squares fit on the probability simplex.
//!
//! For each row we minimise `|M x - f|^2` subject to `x >= 0` and
//! `sum(x) = 1`. The registers here have at most eight basis states, so the
//! problem is solved exactly by active-set enumeration: each candidate
//! support gets its equality-constrained solution from the KKT system, and
//! the best feasible candidate wins.

use nalgebra::{DMatrix, DVector};

use super::confusion::{ConfusionMatrix, CONDITION_LIMIT};
use super::record::ExperimentRecord;
use crate::error::{Error, Result};

/// Largest register for which the support enumeration is attempted.
const MAX_ENUMERATED_DIM: usize = 8;

pub fn mitigate(record: &ExperimentRecord, m: &ConfusionMatrix) -> Result<ExperimentRecord> {
    if record.mitigated {
        return Err(Error::RecordMismatch("record is already mitigated".into()));
    }
    if m.dim() != record.dim() {
        return Err(Error::DimensionMismatch { expected: record.dim(), found: m.dim() });
    }
    let condition_number = m.condition_number();
    if !(condition_number <= CONDITION_LIMIT) {
        return Err(Error::MitigationUnreliable { condition_number });
    }
    let probs = record
        .probs
        .iter()
        .map(|row| simplex_least_squares(m.matrix(), row))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentRecord { probs, mitigated: true, ..record.clone() })
}

/// `argmin |M x - f|` over the probability simplex.
pub fn simplex_least_squares(m: &DMatrix<f64>, f: &[f64]) -> Result<Vec<f64>> {
    let dim = m.ncols();
    if f.len() != m.nrows() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: f.len() });
    }
    if dim > MAX_ENUMERATED_DIM {
        return Err(Error::DimensionMismatch { expected: MAX_ENUMERATED_DIM, found: dim });
    }
    let f = DVector::from_column_slice(f);

    // Fast path: the full-support solution is usually already feasible.
    let full: Vec<usize> = (0..dim).collect();
    if let Some(x) = solve_on_support(m, &f, &full) {
        if x.iter().all(|&v| v >= 0.0) {
            return Ok(x);
        }
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << dim) {
        let support: Vec<usize> = (0..dim).filter(|i| mask & (1 << i) != 0).collect();
        let Some(x) = solve_on_support(m, &f, &support) else { continue };
        if x.iter().any(|&v| v < 0.0) {
            continue;
        }
        let residual = (m * DVector::from_column_slice(&x) - &f).norm_squared();
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, x));
        }
    }
    best.map(|(_, x)| x)
        .ok_or_else(|| Error::MitigationUnreliable { condition_number: f64::INFINITY })
}

/// Equality-constrained least squares with `x_i = 0` off `support`.
fn solve_on_support(m: &DMatrix<f64>, f: &DVector<f64>, support: &[usize]) -> Option<Vec<f64>> {
    let k = support.len();
    let cols = m.select_columns(support);
    let mut kkt = DMatrix::zeros(k + 1, k + 1);
    kkt.view_mut((0, 0), (k, k)).copy_from(&(cols.transpose() * &cols));
    for i in 0..k {
        kkt[(i, k)] = 1.0;
        kkt[(k, i)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs.rows_mut(0, k).copy_from(&(cols.transpose() * f));
    rhs[k] = 1.0;
    let sol = kkt.lu().solve(&rhs)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut x = vec![0.0; m.ncols()];
    for (i, &s) in support.iter().enumerate() {
        x[s] = sol[i];
    }
    Some(x)
}
