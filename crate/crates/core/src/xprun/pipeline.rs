//! Per-realization evaluation of the three networks.

use crate::cluster::{bsr_clusters, lsf_default_clusters, ClusterAssignment};
use crate::config::NetworkConfig;
use crate::error::Result;
use crate::netgen::ChannelSet;
use crate::precode::pinv_precoder;
use crate::rates::{ber_monte_carlo, per_link_rates, zf_sum_rate, BerEstimate, RateMatrix};
use crate::rng::SimRng;
use crate::sched::{fgr_schedule, gr_select};

use super::{ClusteringMode, SchedulerMode};

/// Network variants compared in every sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Network {
    CellFree,
    LsfUccf,
    BsrUccf,
}

impl Network {
    pub const ALL: [Network; 3] = [Network::CellFree, Network::LsfUccf, Network::BsrUccf];
}

/// Both clusterings of one realization at one transmit power.
#[derive(Debug, Clone)]
pub struct Clusterings {
    pub lsf: ClusterAssignment,
    pub bsr: ClusterAssignment,
    pub link_rates: RateMatrix,
}

impl Clusterings {
    pub fn get(&self, network: Network) -> Option<&ClusterAssignment> {
        match network {
            Network::CellFree => None,
            Network::LsfUccf => Some(&self.lsf),
            Network::BsrUccf => Some(&self.bsr),
        }
    }

    pub fn for_mode(&self, mode: ClusteringMode) -> Option<&ClusterAssignment> {
        match mode {
            ClusteringMode::None => None,
            ClusteringMode::Lsf => Some(&self.lsf),
            ClusteringMode::Bsr => Some(&self.bsr),
        }
    }
}

/// Per-link rates under the provisional full-network pseudo-inverse precoder,
/// computed on the unmasked estimate for all `K` UEs.
pub fn provisional_link_rates(channel: &ChannelSet, config: &NetworkConfig) -> Result<RateMatrix> {
    let provisional = pinv_precoder(&channel.g_hat, config.power_budget)?;
    per_link_rates(
        &channel.g_hat,
        &channel.g_tilde,
        &provisional.p,
        config.link_rate_power(),
        config.noise_var,
    )
}

pub fn build_clusterings(channel: &ChannelSet, config: &NetworkConfig) -> Result<Clusterings> {
    let link_rates = provisional_link_rates(channel, config)?;
    Ok(Clusterings {
        lsf: lsf_default_clusters(&channel.beta),
        bsr: bsr_clusters(&link_rates),
        link_rates,
    })
}

/// UEs served without a scheduler: the first `n`. Positions are i.i.d., so
/// this is a uniformly random subset.
pub fn unscheduled_set(config: &NetworkConfig) -> Vec<usize> {
    (0..config.per_slot.min(config.ues)).collect()
}

/// Zero-forcing sum-rate of a fixed UE set, masked when clustered.
pub fn set_rate(
    channel: &ChannelSet,
    clusters: Option<&ClusterAssignment>,
    config: &NetworkConfig,
    ues: &[usize],
) -> Result<f64> {
    let served = channel.select_ues(ues);
    let (g_hat, g_tilde) = match clusters {
        Some(c) => {
            let c = c.select_ues(ues);
            (
                crate::cluster::apply_mask(&served.g_hat, &c)?,
                crate::cluster::apply_mask(&served.g_tilde, &c)?,
            )
        }
        None => (served.g_hat, served.g_tilde),
    };
    Ok(zf_sum_rate(
        &g_hat,
        &g_tilde,
        config.power_budget,
        config.rho_f,
        config.noise_var,
    )?
    .sum_rate)
}

/// Sum-rate of one network under the chosen scheduler: the rate of the first
/// `n` UEs, of one greedy slot, or the F-Gr frame average.
pub fn network_rate(
    channel: &ChannelSet,
    clusters: Option<&ClusterAssignment>,
    config: &NetworkConfig,
    scheduler: SchedulerMode,
) -> Result<f64> {
    match scheduler {
        SchedulerMode::None => set_rate(channel, clusters, config, &unscheduled_set(config)),
        SchedulerMode::Gr => {
            let everyone: Vec<usize> = (0..channel.ues()).collect();
            Ok(gr_select(channel, clusters, config, &everyone)?.rate)
        }
        SchedulerMode::Fgr => {
            let schedule = fgr_schedule(channel, clusters, config)?;
            Ok(schedule.average_sum_rate(config.per_slot))
        }
    }
}

/// UE sets transmitted in one frame under the chosen scheduler.
pub fn served_sets(
    channel: &ChannelSet,
    clusters: Option<&ClusterAssignment>,
    config: &NetworkConfig,
    scheduler: SchedulerMode,
) -> Result<Vec<Vec<usize>>> {
    Ok(match scheduler {
        SchedulerMode::None => vec![unscheduled_set(config)],
        SchedulerMode::Gr => {
            let everyone: Vec<usize> = (0..channel.ues()).collect();
            vec![gr_select(channel, clusters, config, &everyone)?.selected]
        }
        SchedulerMode::Fgr => fgr_schedule(channel, clusters, config)?
            .slots
            .into_iter()
            .map(|s| s.ue_set)
            .collect(),
    })
}

/// Bit errors of one network over every set it serves in the frame.
pub fn network_ber(
    channel: &ChannelSet,
    clusters: Option<&ClusterAssignment>,
    config: &NetworkConfig,
    scheduler: SchedulerMode,
    rng: &mut SimRng,
    n_symbols: usize,
) -> Result<BerEstimate> {
    let mut total = BerEstimate::default();
    for set in served_sets(channel, clusters, config, scheduler)? {
        let served = channel.select_ues(&set);
        let masks = clusters.map(|c| c.select_ues(&set));
        total = total.merge(ber_monte_carlo(
            &served,
            masks.as_ref(),
            config,
            rng,
            n_symbols,
        )?);
    }
    Ok(total)
}
