//! Greedy (Gr) and fair-greedy (F-Gr) multiuser scheduling.
//!
//! F-Gr alternates two kinds of timeslot until every UE has been served
//! exactly once: odd slots run the greedy sum-rate selection over the UEs
//! still waiting, even slots take the UEs with the weakest channels. Best
//! and poor UEs therefore wait on average about the same number of slots.

use nalgebra::DMatrix;

use crate::cluster::{apply_mask, ClusterAssignment};
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::netgen::ChannelSet;
use crate::rates::SubsetRates;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotClass {
    /// Greedy sum-rate selection.
    Best,
    /// Weakest remaining channels.
    Poor,
}

impl SlotClass {
    /// Class of 1-based slot `index` under the odd/even alternation.
    pub fn for_slot(index: usize) -> Self {
        if index % 2 == 1 {
            SlotClass::Best
        } else {
            SlotClass::Poor
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SlotClass::Best => "best",
            SlotClass::Poor => "poor",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub ue_set: Vec<usize>,
    pub class: SlotClass,
    pub achieved_rate: f64,
}

impl Slot {
    /// `n_i`.
    pub fn scheduled(&self) -> usize {
        self.ue_set.len()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schedule {
    pub slots: Vec<Slot>,
}

impl Schedule {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Frame-average sum-rate over the slots actually used.
    pub fn average_sum_rate(&self, per_slot: usize) -> f64 {
        average_sum_rate(self, per_slot, self.len())
    }

    /// Checks that the slot sets are pairwise disjoint, cover `0..ues`, and
    /// hold at most `per_slot` UEs each.
    pub fn check_partition(&self, ues: usize, per_slot: usize) -> Result<()> {
        let mut seen = vec![false; ues];
        for (i, slot) in self.slots.iter().enumerate() {
            if slot.scheduled() > per_slot {
                return Err(Error::InvalidExperiment(format!(
                    "slot {} holds {} > {per_slot} UEs",
                    i + 1,
                    slot.scheduled()
                )));
            }
            for &k in &slot.ue_set {
                if k >= ues || std::mem::replace(&mut seen[k], true) {
                    return Err(Error::InvalidExperiment(format!(
                        "UE {k} out of range or scheduled twice"
                    )));
                }
            }
        }
        match seen.iter().position(|&s| !s) {
            Some(k) => Err(Error::InvalidExperiment(format!("UE {k} never scheduled"))),
            None => Ok(()),
        }
    }
}

/// Greedy selection result; `rate_trace[i]` is the rate after `i + 1` UEs.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOutcome {
    pub selected: Vec<usize>,
    pub rate: f64,
    pub rate_trace: Vec<f64>,
}

/// Greedy sum-rate user selection.
///
/// Column `j` of `g_eff` is the channel of UE `candidates[j]`. The first UE
/// is the one with the largest channel power; each further step adds the
/// candidate that maximizes `rate_fn` over the enlarged set, stopping at `n`
/// UEs or as soon as no candidate raises the rate. Ties go to the earlier
/// candidate.
pub fn gr_schedule<F>(
    g_eff: &DMatrix<C64>,
    candidates: &[usize],
    n: usize,
    mut rate_fn: F,
) -> Result<GreedyOutcome>
where
    F: FnMut(&[usize]) -> Result<f64>,
{
    if candidates.is_empty() || n == 0 {
        return Err(Error::InvalidExperiment(
            "greedy scheduling needs candidates and n >= 1".into(),
        ));
    }
    if g_eff.ncols() != candidates.len() {
        return Err(Error::Dimension(format!(
            "{} channel columns for {} candidates",
            g_eff.ncols(),
            candidates.len()
        )));
    }
    let powers = (0..g_eff.ncols()).map(|j| g_eff.column(j).norm_squared());
    let seed = first_argmax(powers).expect("non-empty");
    greedy_from_seed(candidates, seed, n, &mut rate_fn)
}

fn first_argmax(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

fn greedy_from_seed<F>(
    candidates: &[usize],
    seed: usize,
    n: usize,
    rate_fn: &mut F,
) -> Result<GreedyOutcome>
where
    F: FnMut(&[usize]) -> Result<f64>,
{
    let mut selected = vec![candidates[seed]];
    let mut rate = rate_fn(&selected)?;
    let mut rate_trace = vec![rate];
    let mut pool: Vec<usize> = candidates
        .iter()
        .enumerate()
        .filter_map(|(j, &k)| (j != seed).then_some(k))
        .collect();

    while selected.len() < n && !pool.is_empty() {
        let mut best: Option<(usize, f64)> = None;
        for (i, &k) in pool.iter().enumerate() {
            selected.push(k);
            let r = rate_fn(&selected)?;
            selected.pop();
            if best.is_none_or(|(_, b)| r > b) {
                best = Some((i, r));
            }
        }
        let (i, r) = best.expect("pool is non-empty");
        if r <= rate {
            break;
        }
        selected.push(pool.remove(i));
        rate = r;
        rate_trace.push(rate);
    }
    Ok(GreedyOutcome {
        selected,
        rate,
        rate_trace,
    })
}

/// Channels as seen by the scheduler: masked per UE in user-centric mode.
struct FrameChannels {
    rates: SubsetRates,
    /// `||g_k||^2` of the (masked) true channel.
    true_power: Vec<f64>,
}

impl FrameChannels {
    fn new(
        channel: &ChannelSet,
        clusters: Option<&ClusterAssignment>,
        config: &NetworkConfig,
    ) -> Result<Self> {
        let (g_hat, g_tilde, g) = match clusters {
            Some(c) => (
                apply_mask(&channel.g_hat, c)?,
                apply_mask(&channel.g_tilde, c)?,
                apply_mask(&channel.g, c)?,
            ),
            None => (
                channel.g_hat.clone(),
                channel.g_tilde.clone(),
                channel.g.clone(),
            ),
        };
        let rates = SubsetRates::new(
            &g_hat,
            &g_tilde,
            config.power_budget,
            config.rho_f,
            config.noise_var,
        )?;
        let true_power = (0..g.ncols()).map(|k| g.column(k).norm_squared()).collect();
        Ok(Self { rates, true_power })
    }

    fn greedy(&self, candidates: &[usize], n: usize) -> Result<GreedyOutcome> {
        let seed = first_argmax(candidates.iter().map(|&k| self.rates.channel_power(k)))
            .ok_or_else(|| Error::InvalidExperiment("empty candidate pool".into()))?;
        greedy_from_seed(candidates, seed, n, &mut |set: &[usize]| {
            Ok(self.rates.rate(set))
        })
    }

    /// The `n` candidates with the smallest true channel power, lowest index first on ties.
    fn poorest(&self, candidates: &[usize], n: usize) -> Vec<usize> {
        let mut order = candidates.to_vec();
        order.sort_by(|&a, &b| self.true_power[a].total_cmp(&self.true_power[b]));
        order.truncate(n);
        order
    }
}

/// Greedy selection over the UEs of `channel` using zero-forcing sum-rates
/// on the (masked) estimate.
pub fn gr_select(
    channel: &ChannelSet,
    clusters: Option<&ClusterAssignment>,
    config: &NetworkConfig,
    candidates: &[usize],
) -> Result<GreedyOutcome> {
    FrameChannels::new(channel, clusters, config)?.greedy(candidates, config.per_slot)
}

/// Fair-greedy frame schedule over all `K` UEs of `channel`.
///
/// Odd slots run the greedy selection over the waiting UEs, even slots take
/// the `n` waiting UEs with the weakest true channel power. A slot at or past
/// the nominal frame end that can hold everyone left takes them all. When
/// greedy early stops leave more UEs than the nominal frame can hold, extra
/// slots are appended following the same alternation.
pub fn fgr_schedule(
    channel: &ChannelSet,
    clusters: Option<&ClusterAssignment>,
    config: &NetworkConfig,
) -> Result<Schedule> {
    let (ues, n) = (channel.ues(), config.per_slot);
    let nominal = config.frame_slots();
    if nominal * n < ues {
        return Err(Error::InfeasibleFrame {
            slots: nominal,
            per_slot: n,
            ues,
        });
    }
    let frame = FrameChannels::new(channel, clusters, config)?;
    let mut waiting: Vec<usize> = (0..ues).collect();
    let mut slots = Vec::new();
    let mut index = 0;
    while !waiting.is_empty() {
        index += 1;
        let class = SlotClass::for_slot(index);
        let ue_set = if index >= nominal && waiting.len() <= n {
            waiting.clone()
        } else {
            match class {
                SlotClass::Best => frame.greedy(&waiting, n)?.selected,
                SlotClass::Poor => frame.poorest(&waiting, n),
            }
        };
        waiting.retain(|k| !ue_set.contains(k));
        let achieved_rate = frame.rates.rate(&ue_set);
        slots.push(Slot {
            ue_set,
            class,
            achieved_rate,
        });
    }
    Ok(Schedule { slots })
}

/// Plain greedy baseline over a frame: every slot reselects from all `K` UEs
/// with no removal. The channel is static over the frame and the selection
/// deterministic, so every slot carries the same set.
pub fn gr_schedule_frame(
    channel: &ChannelSet,
    clusters: Option<&ClusterAssignment>,
    config: &NetworkConfig,
) -> Result<Schedule> {
    let frame = FrameChannels::new(channel, clusters, config)?;
    let everyone: Vec<usize> = (0..channel.ues()).collect();
    let pick = frame.greedy(&everyone, config.per_slot)?;
    let slot = Slot {
        ue_set: pick.selected,
        class: SlotClass::Best,
        achieved_rate: pick.rate,
    };
    Ok(Schedule {
        slots: vec![slot; config.frame_slots()],
    })
}

/// `SR_Av = (1/T) sum_i (n_i / n) SR^i`.
pub fn average_sum_rate(schedule: &Schedule, per_slot: usize, slots: usize) -> f64 {
    if slots == 0 {
        return 0.0;
    }
    let weighted: f64 = schedule
        .slots
        .iter()
        .map(|s| s.scheduled() as f64 / per_slot as f64 * s.achieved_rate)
        .sum();
    weighted / slots as f64
}

/// Per-UE waiting slot (1-based) and class-average waiting times.
#[derive(Debug, Clone, PartialEq)]
pub struct WaitingStats {
    /// Slot index of each UE, `None` if never scheduled.
    pub t_w: Vec<Option<usize>>,
    pub mean_best: Option<f64>,
    pub mean_poor: Option<f64>,
}

impl WaitingStats {
    /// `mean_poor - mean_best`, zero when either class is empty.
    pub fn gap(&self) -> f64 {
        match (self.mean_best, self.mean_poor) {
            (Some(b), Some(p)) => p - b,
            _ => 0.0,
        }
    }
}

pub fn waiting_stats(schedule: &Schedule, ues: usize) -> WaitingStats {
    let mut t_w = vec![None; ues];
    let (mut best, mut poor) = ((0usize, 0usize), (0usize, 0usize));
    for (i, slot) in schedule.slots.iter().enumerate() {
        let idx = i + 1;
        for &k in &slot.ue_set {
            if k < ues && t_w[k].is_none() {
                t_w[k] = Some(idx);
                let acc = match slot.class {
                    SlotClass::Best => &mut best,
                    SlotClass::Poor => &mut poor,
                };
                acc.0 += idx;
                acc.1 += 1;
            }
        }
    }
    let mean = |(sum, count): (usize, usize)| (count > 0).then(|| sum as f64 / count as f64);
    WaitingStats {
        t_w,
        mean_best: mean(best),
        mean_poor: mean(poor),
    }
}
