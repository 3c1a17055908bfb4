//! Shot sampling, readout confusion and mitigation, and experiment records.

pub mod confusion;
pub mod mitigation;
pub mod record;
pub mod sampling;

pub use confusion::{apply_confusion, estimate_confusion, ConfusionMatrix, CONDITION_LIMIT, DEFAULT_FLIP};
pub use mitigation::{mitigate, simplex_least_squares};
pub use record::{format_float, synthesize_record, Acquisition, ExperimentRecord};
pub use sampling::{sample_counts, sample_counts_on_stream};
