//! Monte Carlo harness, summary statistics, and the numerical-study tables.

mod harness;
mod stats;
mod tables;

pub use harness::{
    attach_normal_ks, attach_poisson_ks, run_location_scale, run_monte_carlo, ExperimentConfig,
    ExperimentReport, KsNormal, LsExperimentReport, LsNReport, ModelTruth, NReport, Scaling,
};
pub use stats::{ks_one_sample, ks_two_sample, rate_slope};
pub use tables::{run_tables, TableSet, TablesConfig};
