use rayon::prelude::*;

use super::params::{ParameterLayout, ParameterVector};
use crate::error::{Error, Result};
use crate::measurement::ExperimentRecord;
use crate::propagator::{populations, run_experiment_with, Integrator};
use crate::qdyn::Lindbladian;

/// Every record must cover the same qubits, and as many as the layout.
pub fn check_records(layout: &ParameterLayout, records: &[ExperimentRecord]) -> Result<()> {
    let Some(first) = records.first() else { return Ok(()) };
    for (i, rec) in records.iter().enumerate() {
        if rec.n_qubits() != layout.n_qubits {
            return Err(Error::RecordMismatch(format!(
                "record {i} ({}) covers {} qubits, parameters describe {}",
                rec.kind,
                rec.n_qubits(),
                layout.n_qubits
            )));
        }
        if rec.qubits != first.qubits {
            return Err(Error::RecordMismatch(format!(
                "record {i} covers qubits {:?}, record 0 covers {:?}",
                rec.qubits, first.qubits
            )));
        }
    }
    Ok(())
}

/// Model populations on the record's grid (including its scale factor).
pub fn model_populations(params: &ParameterVector, record: &ExperimentRecord) -> Result<Vec<Vec<f64>>> {
    let l = lindbladian(params)?;
    populations(&run_experiment_with(record.kind, &l, &record.grid, Integrator::default())?)
}

fn lindbladian(params: &ParameterVector) -> Result<Lindbladian> {
    let (spec, noise) = params.unpack().to_specs()?;
    Lindbladian::new(&spec, &noise)
}

/// Sum of squared differences between model and recorded probabilities over
/// all records, grid points and bitstrings.
pub fn loss_fn(params: &ParameterVector, records: &[ExperimentRecord]) -> Result<f64> {
    check_records(&params.layout, records)?;
    let annotate = |e: Error| Error::LossEvaluation { params: params.values.clone(), source: Box::new(e) };
    if records.is_empty() {
        return Ok(0.0);
    }
    let l = lindbladian(params).map_err(annotate)?;
    let parts: Vec<f64> = records
        .par_iter()
        .map(|rec| {
            let sim = populations(&run_experiment_with(rec.kind, &l, &rec.grid, Integrator::default())?)?;
            Ok(squared_residual(&sim, &rec.probs))
        })
        .collect::<Result<Vec<_>>>()
        .map_err(annotate)?;
    let total: f64 = parts.iter().sum();
    if total.is_finite() {
        Ok(total)
    } else {
        Err(annotate(Error::IntegrationDiverged { time_us: f64::NAN }))
    }
}

/// Loss at the unoptimised (claimed) parameters.
pub fn claimed_comparison(claimed: &ParameterVector, records: &[ExperimentRecord]) -> Result<f64> {
    loss_fn(claimed, records)
}

pub fn squared_residual(sim: &[Vec<f64>], rec: &[Vec<f64>]) -> f64 {
    sim.iter()
        .zip(rec)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)))
        .sum()
}
