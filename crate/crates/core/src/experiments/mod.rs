//! Monte Carlo campaigns over SCell density: serving distance, detach
//! fraction and available cells per density and signal duration.
//!
//! Trial `i` always draws from [`trial_rng`]`(seed, i)`, so curves are pure
//! functions of the configuration whatever the thread count.

mod campaign;
mod config;
mod trial;

pub use campaign::{
    available_metric, avg_available_cells, detach_fraction, mean_serving_distance, run_campaign,
    run_point, CampaignResult, CurvePoint, Summary, CSV_HEADER, METRIC_AVAILABLE, METRIC_DETACH,
    METRIC_DISTANCE,
};
pub use config::{SimConfig, DEFAULT_CONFIG_TOML, OVERHEAD_TOLERANCE};
pub use trial::{trial_rng, DesignPoint, Experiment, RoutedMessage, TrialResult, TrialTrace};
