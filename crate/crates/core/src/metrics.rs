//! Analytic complexity / signaling-load models and scheduling fairness counts.

use crate::sched::Schedule;

/// FLOP counts for one greedy scheduling pass and the coefficients exchanged
/// to form clusters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityReport {
    pub flops_cf_gr: f64,
    pub flops_lsf_uccf: f64,
    pub flops_bsr_uccf: f64,
    pub signaling_lsf: f64,
    pub signaling_bsr: f64,
}

pub fn complexity(aps: usize, antennas_per_ap: usize, ues: usize) -> ComplexityReport {
    let (l, n, k) = (aps as f64, antennas_per_ap as f64, ues as f64);
    let m = l * n;
    ComplexityReport {
        flops_cf_gr: 4.0 * m.powi(3) + m * (2.0 * k + 6.0),
        flops_lsf_uccf: 9.0 / 128.0 * m.powi(3) + m * (3.0 / 8.0 * k + 7.0) + k + 1.0,
        flops_bsr_uccf: 27.0 / 64.0 * m.powi(3)
            + 27.0 / 32.0 * m.powi(2)
            + 1179.0 / 256.0 * m
            + 19.0 / 8.0 * m * k,
        signaling_lsf: 2.0 * n * n * l * l + n * l * l + n * l,
        signaling_bsr: 4.0 * n * n * l * l + 2.0 * n * l,
    }
}

/// How often each UE was served, one count per frame in which it appears.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FairnessHistogram {
    pub counts: Vec<u64>,
}

impl FairnessHistogram {
    pub fn new(ues: usize) -> Self {
        Self {
            counts: vec![0; ues],
        }
    }

    pub fn record(&mut self, schedule: &Schedule) {
        let mut seen = vec![false; self.counts.len()];
        for slot in &schedule.slots {
            for &k in &slot.ue_set {
                if k < seen.len() {
                    seen[k] = true;
                }
            }
        }
        for (c, s) in self.counts.iter_mut().zip(seen) {
            *c += u64::from(s);
        }
    }

    pub fn min(&self) -> u64 {
        self.counts.iter().copied().min().unwrap_or(0)
    }

    pub fn max(&self) -> u64 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    /// UEs never scheduled.
    pub fn zero_count(&self) -> usize {
        self.counts.iter().filter(|&&c| c == 0).count()
    }
}

pub fn fairness_histogram<'a>(
    schedules: impl IntoIterator<Item = &'a Schedule>,
    ues: usize,
) -> FairnessHistogram {
    let mut hist = FairnessHistogram::new(ues);
    for s in schedules {
        hist.record(s);
    }
    hist
}
