//! Least-squares calibration of chain parameters against delay-sweep records.

pub mod adam;
pub mod gradient;
pub mod loss;
pub mod params;
pub mod report;

pub use adam::{adam_fit, fit_with_mask, free_slots, identifiable_slots, sensitivity_ratios, step_rules, AdamState, FitConfig};
pub use gradient::{central_gradient, GradientEstimate, StepRule};
pub use loss::{check_records, claimed_comparison, loss_fn, model_populations};
pub use params::{ParameterLayout, ParameterSet, ParameterVector, Slot};
pub use report::{CouplingReport, DerivedReport, FitResult, NamedParameter, QubitReport};

use crate::error::Result;
use crate::measurement::ExperimentRecord;

/// Gradient of [`loss_fn`] in physical units, with the step-halving check.
pub fn gradient(params: &ParameterVector, records: &[ExperimentRecord], relative_step: f64) -> Result<GradientEstimate> {
    let rules = step_rules(params, records, relative_step);
    let slots = params.layout.slots();
    central_gradient(
        |v: &[f64]| loss_fn(&ParameterVector { layout: params.layout, values: v.to_vec() }, records),
        &params.values,
        &rules,
        &vec![true; params.len()],
        true,
    )
    .map_err(|i| gradient::probe_error(slots[i].to_string()))
}
