#![allow(dead_code)]

use taxicast::config::{ExperimentConfig, Source, SyntheticCitySpec};

/// A week-long city small enough to run in a couple of seconds.
pub fn small_spec() -> SyntheticCitySpec {
    SyntheticCitySpec {
        days: 7,
        hotspots: 6,
        city_radius_km: 6.0,
        base_rate: 0.5,
        users: 2000,
        regime: None,
        ..SyntheticCitySpec::default()
    }
}

pub fn small_config() -> ExperimentConfig {
    ExperimentConfig {
        source: Source::Synthetic(small_spec()),
        k: 8,
        ..ExperimentConfig::default()
    }
}
