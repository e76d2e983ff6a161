mod completeness;
mod estimate;
mod log;
mod observable;
mod sample;
mod snapshot;

pub use completeness::{check_tomographic_completeness, depolarize, expected_measured_projector, CompletenessReport};
pub use estimate::{
    estimate_observables, estimate_polynomial, mean_snapshot, median_of_means, plan_estimation, shadow_norm_bound,
    snapshot_values, snapshot_variance, EstimationPlan, PlanMode, PolynomialTarget, VarianceReport,
};
pub use log::{parse_log_line, read_log, to_log_line, write_log};
pub use observable::{Observable, ObservableRepr, PauliTerm};
pub use sample::{
    ancilla_state, measured_state, outcome_probabilities, sample_shadow, AncillaDescriptor, SamplingMode, ShadowSample,
    ShadowSampler,
};
pub use snapshot::{snapshot, snapshot_global, snapshot_local, GlobalSnapshot, LocalSnapshot, Snapshot};
