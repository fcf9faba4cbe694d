//! Experiment runner: sweeps, Monte Carlo aggregation and CSV output.
//!
//! Realizations are evaluated on the rayon pool and reduced in realization
//! order, so outputs are byte-identical for a given spec regardless of the
//! number of worker threads.

pub mod pipeline;

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::metrics::{complexity, FairnessHistogram};
use crate::netgen::{realize, realize_in_drop};
use crate::rates::BerEstimate;
use crate::rng::{point_rng, Lane};
use crate::sched::{fgr_schedule, gr_schedule_frame, Schedule};

use pipeline::{build_clusterings, network_ber, network_rate, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Sumrate,
    Ber,
    Schedule,
    Complexity,
    Fairness,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusteringMode {
    Lsf,
    Bsr,
    #[default]
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchedulerMode {
    Gr,
    Fgr,
    #[default]
    None,
}

macro_rules! keyword_enum {
    ($ty:ty, $($name:literal => $var:expr),+ $(,)?) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($var),)+
                    other => Err(Error::InvalidExperiment(format!(
                        "unknown {} '{other}'", stringify!($ty)
                    ))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let name = match self {
                    $(v if *v == $var => $name,)+
                    _ => unreachable!(),
                };
                f.write_str(name)
            }
        }
    };
}

keyword_enum!(Scenario,
    "sumrate" => Scenario::Sumrate,
    "ber" => Scenario::Ber,
    "schedule" => Scenario::Schedule,
    "complexity" => Scenario::Complexity,
    "fairness" => Scenario::Fairness,
);
keyword_enum!(ClusteringMode,
    "lsf" => ClusteringMode::Lsf,
    "bsr" => ClusteringMode::Bsr,
    "none" => ClusteringMode::None,
);
keyword_enum!(SchedulerMode,
    "gr" => SchedulerMode::Gr,
    "fgr" => SchedulerMode::Fgr,
    "none" => SchedulerMode::None,
);

/// Default SNR sweep in dB.
pub const DEFAULT_SNR_GRID: &str = "-10:5:30";
/// Default AP-count sweep for the complexity scenario.
pub const DEFAULT_AP_GRID: [usize; 9] = [1, 2, 4, 8, 16, 25, 36, 64, 100];

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub snr_grid_db: Vec<f64>,
    pub realizations: usize,
    pub config: NetworkConfig,
    pub out_path: Option<PathBuf>,
    /// Network used by the single-network scenarios (fairness, schedule).
    pub clustering: ClusteringMode,
    pub scheduler: SchedulerMode,
    /// QPSK vectors per served set, realization and SNR point.
    pub ber_symbols: usize,
    /// AP counts swept by the complexity scenario.
    pub ap_grid: Vec<usize>,
}

impl ExperimentSpec {
    pub fn new(scenario: Scenario, config: NetworkConfig) -> Self {
        Self {
            scenario,
            snr_grid_db: parse_snr_grid(DEFAULT_SNR_GRID).expect("default grid parses"),
            realizations: 100,
            config,
            out_path: None,
            clustering: ClusteringMode::None,
            scheduler: SchedulerMode::None,
            ber_symbols: 64,
            ap_grid: DEFAULT_AP_GRID.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let bad = |m: &str| Err(Error::InvalidExperiment(m.into()));
        if self.realizations == 0 {
            return bad("realizations must be >= 1");
        }
        if matches!(self.scenario, Scenario::Sumrate | Scenario::Ber) && self.snr_grid_db.is_empty()
        {
            return bad("SNR grid must not be empty");
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return bad("SNR grid must be finite");
        }
        if self.scenario == Scenario::Ber && self.ber_symbols == 0 {
            return bad("BER needs at least one symbol");
        }
        if self.scenario == Scenario::Complexity
            && (self.ap_grid.is_empty() || self.ap_grid.contains(&0))
        {
            return bad("AP grid must be non-empty with L >= 1");
        }
        Ok(())
    }
}

/// Parses an inclusive `min:step:max` sweep, or a single value.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidExperiment(format!("bad SNR grid '{text}', expected min:step:max"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [v] if v.is_finite() => Ok(vec![*v]),
        [lo, step, hi] if lo.is_finite() && hi.is_finite() && *step > 0.0 && hi >= lo => {
            let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| lo + step * i as f64).collect())
        }
        _ => Err(bad()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRateRow {
    pub snr_db: f64,
    pub cf: f64,
    pub lsf_uccf: f64,
    pub bsr_uccf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerRow {
    pub snr_db: f64,
    pub ber_cf: f64,
    pub ber_lsf: f64,
    pub ber_bsr: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FairnessRow {
    pub ue_id: usize,
    pub gr_count: u64,
    pub fgr_count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityRow {
    #[serde(rename = "L")]
    pub aps: usize,
    pub flops_cf: f64,
    pub flops_lsf: f64,
    pub flops_bsr: f64,
    pub sig_lsf: f64,
    pub sig_bsr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleRow {
    pub realization: u64,
    pub slot: usize,
    pub class: &'static str,
    pub n_i: usize,
    pub rate: f64,
}

/// Rows produced by one experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Sumrate(Vec<SumRateRow>),
    Ber(Vec<BerRow>),
    Schedule(Vec<ScheduleRow>),
    Complexity(Vec<ComplexityRow>),
    Fairness(Vec<FairnessRow>),
}

impl Output {
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        fn encode<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r)?;
            }
            w.into_inner()
                .map_err(|e| Error::Csv(e.into_error().into()))
        }
        match self {
            Output::Sumrate(r) => encode(r),
            Output::Ber(r) => encode(r),
            Output::Schedule(r) => encode(r),
            Output::Complexity(r) => encode(r),
            Output::Fairness(r) => encode(r),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let bytes = self.to_csv()?;
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        File::create(path)
            .and_then(|mut f| f.write_all(&bytes))
            .map_err(io)
    }
}

/// Validates and runs `spec`, writing the CSV when `out_path` is set.
pub fn run(spec: &ExperimentSpec) -> Result<Output> {
    spec.validate()?;
    let out = match spec.scenario {
        Scenario::Sumrate => Output::Sumrate(run_sumrate(spec)?),
        Scenario::Ber => Output::Ber(run_ber(spec)?),
        Scenario::Schedule => Output::Schedule(run_schedule(spec)?),
        Scenario::Complexity => Output::Complexity(run_complexity(spec)?),
        Scenario::Fairness => Output::Fairness(run_fairness(spec)?),
    };
    if let Some(path) = &spec.out_path {
        out.write_csv(path)?;
    }
    Ok(out)
}

fn realizations(spec: &ExperimentSpec) -> std::ops::Range<u64> {
    0..spec.realizations as u64
}

/// Sum-rates of the three networks at each SNR point for one realization.
pub fn realization_sumrates(spec: &ExperimentSpec, index: u64) -> Result<Vec<[f64; 3]>> {
    let (_, channel) = realize(&spec.config, index);
    spec.snr_grid_db
        .iter()
        .map(|&snr| {
            let cfg = spec.config.at_snr_db(snr);
            let clusters = build_clusterings(&channel, &cfg)?;
            let mut out = [0.0; 3];
            for (slot, net) in out.iter_mut().zip(Network::ALL) {
                *slot = network_rate(&channel, clusters.get(net), &cfg, spec.scheduler)?;
            }
            Ok(out)
        })
        .collect()
}

/// BER counts of the three networks at each SNR point for one realization.
/// All three networks see the same bits and noise draws at a given point.
pub fn realization_ber(spec: &ExperimentSpec, index: u64) -> Result<Vec<[BerEstimate; 3]>> {
    let (_, channel) = realize(&spec.config, index);
    spec.snr_grid_db
        .iter()
        .enumerate()
        .map(|(point, &snr)| {
            let cfg = spec.config.at_snr_db(snr);
            let clusters = build_clusterings(&channel, &cfg)?;
            let rng = point_rng(spec.config.seed, index, Lane::Symbols, point as u64);
            let mut out = [BerEstimate::default(); 3];
            for (slot, net) in out.iter_mut().zip(Network::ALL) {
                *slot = network_ber(
                    &channel,
                    clusters.get(net),
                    &cfg,
                    spec.scheduler,
                    &mut rng.clone(),
                    spec.ber_symbols,
                )?;
            }
            Ok(out)
        })
        .collect()
}

pub fn run_sumrate(spec: &ExperimentSpec) -> Result<Vec<SumRateRow>> {
    spec.validate()?;
    let per: Vec<Vec<[f64; 3]>> = realizations(spec)
        .into_par_iter()
        .map(|r| realization_sumrates(spec, r))
        .collect::<Result<_>>()?;
    let count = per.len() as f64;
    Ok(spec
        .snr_grid_db
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let mut sum = [0.0; 3];
            for rates in &per {
                for (s, v) in sum.iter_mut().zip(rates[i]) {
                    *s += v;
                }
            }
            SumRateRow {
                snr_db,
                cf: sum[0] / count,
                lsf_uccf: sum[1] / count,
                bsr_uccf: sum[2] / count,
            }
        })
        .collect())
}

pub fn run_ber(spec: &ExperimentSpec) -> Result<Vec<BerRow>> {
    spec.validate()?;
    let per: Vec<Vec<[BerEstimate; 3]>> = realizations(spec)
        .into_par_iter()
        .map(|r| realization_ber(spec, r))
        .collect::<Result<_>>()?;
    Ok(spec
        .snr_grid_db
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let mut total = [BerEstimate::default(); 3];
            for counts in &per {
                for (t, c) in total.iter_mut().zip(counts[i]) {
                    *t = t.merge(c);
                }
            }
            BerRow {
                snr_db,
                ber_cf: total[0].rate(),
                ber_lsf: total[1].rate(),
                ber_bsr: total[2].rate(),
            }
        })
        .collect())
}

/// Gr-frame and F-Gr schedules of fading realization `index` over the
/// large-scale drop `drop`, on the selected network.
pub fn realization_schedules(
    spec: &ExperimentSpec,
    drop: u64,
    index: u64,
) -> Result<(Schedule, Schedule)> {
    let (_, channel) = realize_in_drop(&spec.config, drop, index);
    let cfg = &spec.config;
    let clusters = match spec.clustering {
        ClusteringMode::None => None,
        _ => Some(build_clusterings(&channel, cfg)?),
    };
    let masks = clusters.as_ref().and_then(|c| c.for_mode(spec.clustering));
    Ok((
        gr_schedule_frame(&channel, masks, cfg)?,
        fgr_schedule(&channel, masks, cfg)?,
    ))
}

/// Per-UE scheduling counts. UE identity only means something if the users
/// stay put, so every realization redraws fading over the drop of realization 0.
pub fn run_fairness(spec: &ExperimentSpec) -> Result<Vec<FairnessRow>> {
    spec.validate()?;
    let per: Vec<(Schedule, Schedule)> = realizations(spec)
        .into_par_iter()
        .map(|r| realization_schedules(spec, 0, r))
        .collect::<Result<_>>()?;
    let ues = spec.config.ues;
    let (mut gr, mut fgr) = (FairnessHistogram::new(ues), FairnessHistogram::new(ues));
    for (g, f) in &per {
        gr.record(g);
        fgr.record(f);
    }
    Ok((0..ues)
        .map(|k| FairnessRow {
            ue_id: k,
            gr_count: gr.counts[k],
            fgr_count: fgr.counts[k],
        })
        .collect())
}

/// Per-slot records of the F-Gr frame (or the Gr baseline with `--scheduler gr`).
pub fn run_schedule(spec: &ExperimentSpec) -> Result<Vec<ScheduleRow>> {
    spec.validate()?;
    let per: Vec<(Schedule, Schedule)> = realizations(spec)
        .into_par_iter()
        .map(|r| realization_schedules(spec, r, r))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (r, (gr, fgr)) in per.iter().enumerate() {
        let schedule = if spec.scheduler == SchedulerMode::Gr {
            gr
        } else {
            fgr
        };
        for (i, slot) in schedule.slots.iter().enumerate() {
            rows.push(ScheduleRow {
                realization: r as u64,
                slot: i + 1,
                class: slot.class.as_str(),
                n_i: slot.scheduled(),
                rate: slot.achieved_rate,
            });
        }
    }
    Ok(rows)
}

/// Complexity model over the AP grid, keeping `N` and `K` from the config.
pub fn run_complexity(spec: &ExperimentSpec) -> Result<Vec<ComplexityRow>> {
    spec.validate()?;
    Ok(spec
        .ap_grid
        .iter()
        .map(|&aps| {
            let c = complexity(aps, spec.config.antennas_per_ap, spec.config.ues);
            ComplexityRow {
                aps,
                flops_cf: c.flops_cf_gr,
                flops_lsf: c.flops_lsf_uccf,
                flops_bsr: c.flops_bsr_uccf,
                sig_lsf: c.signaling_lsf,
                sig_bsr: c.signaling_bsr,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snr_grid_parsing() {
        assert_eq!(parse_snr_grid("-10:5:30").unwrap().len(), 9);
        assert_eq!(parse_snr_grid("0:10:20").unwrap(), vec![0.0, 10.0, 20.0]);
        assert_eq!(parse_snr_grid("7").unwrap(), vec![7.0]);
        assert_eq!(parse_snr_grid("0:0.1:0.3").unwrap().len(), 4);
        for bad in ["", "1:2", "0:0:5", "5:1:0", "a:1:2", "0:-1:5"] {
            assert!(parse_snr_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn keywords_round_trip() {
        for s in ["sumrate", "ber", "schedule", "complexity", "fairness"] {
            assert_eq!(s.parse::<Scenario>().unwrap().to_string(), s);
        }
        assert_eq!(
            "bsr".parse::<ClusteringMode>().unwrap(),
            ClusteringMode::Bsr
        );
        assert_eq!("fgr".parse::<SchedulerMode>().unwrap(), SchedulerMode::Fgr);
        assert!("xyz".parse::<SchedulerMode>().is_err());
    }

    #[test]
    fn empty_grid_fails_validation() {
        let mut spec = ExperimentSpec::new(Scenario::Sumrate, NetworkConfig::default());
        spec.snr_grid_db.clear();
        assert!(matches!(run(&spec), Err(Error::InvalidExperiment(_))));
        spec.scenario = Scenario::Ber;
        assert!(run(&spec).is_err());
        spec.scenario = Scenario::Complexity;
        assert!(run(&spec).is_ok());
    }

    #[test]
    fn complexity_rows() {
        let spec = ExperimentSpec::new(Scenario::Complexity, NetworkConfig::default());
        let rows = run_complexity(&spec).unwrap();
        let r16 = rows.iter().find(|r| r.aps == 16).unwrap();
        assert_eq!(r16.flops_cf, 1_065_344.0);
        let csv = String::from_utf8(Output::Complexity(rows).to_csv().unwrap()).unwrap();
        assert!(csv.starts_with("L,flops_cf,flops_lsf,flops_bsr,sig_lsf,sig_bsr\n"));
    }
}
