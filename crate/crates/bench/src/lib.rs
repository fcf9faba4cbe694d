//! Fixtures shared by the benchmarks.

use cfmimo_core::netgen::realize;
use cfmimo_core::{ChannelSet, NetworkConfig};

/// The reference network (`L = 16`, `N = 4`, `K = 128`, `n = 20`) at `snr_db`.
pub fn reference_config(snr_db: f64) -> NetworkConfig {
    NetworkConfig {
        aps: 16,
        antennas_per_ap: 4,
        ues: 128,
        per_slot: 20,
        ..NetworkConfig::default()
    }
    .at_snr_db(snr_db)
}

pub fn reference_channel(snr_db: f64) -> (NetworkConfig, ChannelSet) {
    let config = reference_config(snr_db);
    let (_, channel) = realize(&config, 0);
    (config, channel)
}
