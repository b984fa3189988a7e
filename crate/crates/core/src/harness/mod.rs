//! Seeded Monte Carlo experiments over the full design pipeline.

mod config;
mod geometry;
mod output;
mod sweep;
mod trial;

pub use config::{
    ArrayConfig, ChainConfig, GeometryConfig, LinkConfig, LinkTable, Method, PowerConfig, PsoConfig, RunConfig,
    ScenarioConfig,
};
pub use geometry::{resolve_geometry, ris_x_for_d1, ris_x_for_ratio, Placement};
pub use output::{format_results, format_trace, write_results, write_trace, RESULTS_HEADER};
pub use sweep::{aggregate, cell_seed, channel_seed, run_sweep, Aggregate, ResultRow, SweepOutput, SweepSpec, SweepVar};
pub use trial::{run_trial, run_trial_on_channel, PsoSummary, Scenario, TrialFlag, TrialResult, TrialSeeds};
