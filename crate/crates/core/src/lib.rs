//! Target localization from binary proximity readings.
//!
//! Beacons with disk-shaped sensing ranges are deployed in a rectangular
//! domain. A target's reading is the vector of beacons that detect it; the
//! domain is rasterized into cells, cells are grouped by the reading at their
//! centers, and the share of the domain carrying the observed reading is the
//! localization uncertainty. [`montecarlo`] repeats this over random
//! deployments to find the radius and beacon count that minimize it.

pub mod cli;
pub mod geometry;
pub mod montecarlo;
pub mod rss;
pub mod sigmap;

pub use geometry::{detects, signature_at, Beacon, Deployment, Domain, Point, Signature};
pub use montecarlo::{
    random_deployment, run_trials, sweep_beacons, sweep_radius, Metric, SweepRecord, SweepResult,
    TrialConfig, TrialStats,
};
pub use rss::{
    friis_received_power, radius_from_threshold, rss_at, sample_shadow, FriisParams, PathLossParams,
};
pub use sigmap::{
    build_signature_map, expected_uncertainty, localize, uncertainty_for_reading, GridSpec,
    LocalizationResult, SignatureMap,
};
