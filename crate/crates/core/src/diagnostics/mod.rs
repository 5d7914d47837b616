//! Mixing metrics, posterior summaries, the enumeration oracle and scaling
//! measurements.

mod enumerate;
mod hmm;
mod jump;
mod oracle;
mod scaling;
mod summary;

pub use enumerate::{
    config_from_id, config_id, enumerate_posterior, tv_distance, ConfigHistogram, EnumeratedPosterior,
    ENUMERATION_LIMIT,
};
pub use hmm::Hmm;
pub use jump::{indicator_distance, majd_indicator, majd_ordered, ordered_distance, JumpDistance};
pub use oracle::{
    hmm_cross_check, kernel_tv_distance, write_oracle_csv, OracleCheck, HMM_TOLERANCE, TV_TOLERANCE,
};
pub use scaling::{
    log_log_slope, normalise_times, scaling_benchmark, time_slope, write_scaling_csv, ScalingCase,
    ScalingPoint,
};
pub use summary::{
    coverage, credible_intervals, quantile, write_credible_intervals, CountInterval, StateCountSeries,
    DEFAULT_BURN_IN,
};
