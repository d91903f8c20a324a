//! Multilevel Monte Carlo estimators.
//!
//! A run is a list of [`Level`]s whose means telescope to the target
//! expectation. Multi-level runs start with a short pilot per level, turn the
//! pilot's cost and variance into `K_l`, split the variance budget
//! `(epsilon / z)^2` with [`allocate`], and then sample each level in batches
//! until its estimator variance drops below its share.

mod allocate;
mod estimator;
mod exec;
mod report;
mod stats;

pub use allocate::{allocate, predicted_cost, Allocation};
pub use estimator::{
    cmc_exact, cmc_tau, control_variate, mlmc_biased, mlmc_unbiased, pilot, ControlVariate,
    EstimatorConfig, Level, LevelPlan, LevelStats, Problem,
};
pub use exec::{run_chunk, Executor, SampleFn, Sequential, CHUNK_SIZE};
pub use report::{EstimateReport, LevelReport, Method};
pub use stats::{LevelAccumulator, Sample, Welford};

pub use crate::model::a_of_h;
