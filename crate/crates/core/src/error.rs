use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] toml::de::Error),

    /// The effective channel Gram matrix is (near-)singular.
    #[error("effective channel is rank deficient ({rows}x{cols})")]
    RankDeficient { rows: usize, cols: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// `T * n < K`: the frame cannot serve every UE once.
    #[error("infeasible frame: {slots} slots x {per_slot} UEs < {ues} UEs")]
    InfeasibleFrame {
        slots: usize,
        per_slot: usize,
        ues: usize,
    },

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
