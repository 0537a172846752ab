//! Effort-normalized rate estimation for date-ranged find counts.
//!
//! Finds with uncertain use dates are spread over a year grid by aoristic
//! weighting ([`chronology`]). Each collection context's fieldwork effort
//! and its shortfall against the most intensive context ([`intensity`]) set
//! the weight of a Gamma prior ([`priors`]) in a conjugate Gamma-Poisson
//! update ([`inference`]). [`simulation`] checks the machinery against known
//! ground truth and a brute-force posterior, and [`pipeline`] with [`io`]
//! wire it to CSV/JSON files and SVG plots.

pub mod chronology;
pub mod error;
pub mod inference;
pub mod intensity;
pub mod io;
pub mod pipeline;
pub mod priors;
pub mod simulation;

pub use chronology::{
    aoristic_weights, build_grid, expected_values, AoristicSeries, AoristicWeights, ContextId, FindId, FindRecord,
    TimeGrid,
};
pub use error::{Error, Result};
pub use inference::{
    credible_interval, gamma_cdf, gamma_quantile, interval_estimate, posterior, posterior_mean, CredibleInterval,
    GammaPosterior, RateCell,
};
pub use intensity::{compute_deficits, effective_duration, ContextRecord, IntensityProfile};
pub use pipeline::{run_analysis, AnalysisConfig, GridSpec};
pub use priors::{elicit, FixedPrior, PriorStrategy};
pub use simulation::{coverage_experiment, grid_posterior_oracle, simulate_counts, SimulationSpec};
