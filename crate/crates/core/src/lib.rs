//! Downlink simulator for cell-free massive MIMO networks.
//!
//! The crate generates seeded channel realizations, clusters antennas per UE
//! either by large-scale fading (LSF) or by per-link information rates with a
//! coverage boost (BSR), zero-forces on the (masked) channel estimate, and
//! schedules UEs with the greedy (Gr) or fair-greedy (F-Gr) algorithm. The
//! [`xprun`] module sweeps these pipelines and writes CSV.
//!
//! ```
//! use cfmimo_core::{netgen, xprun::pipeline, NetworkConfig};
//!
//! let cfg = NetworkConfig { ues: 24, per_slot: 8, ..NetworkConfig::default() };
//! let (_, channel) = netgen::realize(&cfg, 0);
//! let clusters = pipeline::build_clusterings(&channel, &cfg).unwrap();
//! let cf = pipeline::set_rate(&channel, None, &cfg, &[0, 1, 2]).unwrap();
//! let bsr = pipeline::set_rate(&channel, Some(&clusters.bsr), &cfg, &[0, 1, 2]).unwrap();
//! assert!(cf > 0.0 && bsr > 0.0);
//! ```

pub mod cluster;
pub mod config;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod netgen;
pub mod precode;
pub mod rates;
pub mod rng;
pub mod sched;
pub mod xprun;

pub use num_complex::Complex64 as C64;

pub use cluster::ClusterAssignment;
pub use config::NetworkConfig;
pub use error::{Error, Result};
pub use metrics::{ComplexityReport, FairnessHistogram};
pub use netgen::{ChannelSet, Geometry};
pub use precode::Precoder;
pub use rates::{RateMatrix, RateReport};
pub use sched::{Schedule, SlotClass, WaitingStats};
