//! Per-UE antenna selection: large-scale-fading (LSF) clustering, rate
//! threshold clustering and the boosted-rate (BSR) coverage augmentation.
//!
//! Masks are antenna-level (length `M`). Because large-scale gains are shared
//! by every antenna of an AP, LSF selections always come out as whole APs;
//! rate-based selections can split an AP since small-scale fading differs
//! per antenna.
//!
//! Thresholds are inclusive and the argmax fallback takes the lowest index
//! on ties.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::rates::RateMatrix;
use crate::C64;

/// Antenna-selection masks, one row per UE (the diagonal of `A_k`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    mask: Vec<Vec<bool>>,
}

impl ClusterAssignment {
    pub fn from_masks(mask: Vec<Vec<bool>>) -> Self {
        Self { mask }
    }

    /// Every antenna serves every UE (plain cell-free operation).
    pub fn full(ues: usize, antennas: usize) -> Self {
        Self {
            mask: vec![vec![true; antennas]; ues],
        }
    }

    pub fn ues(&self) -> usize {
        self.mask.len()
    }

    pub fn antennas(&self) -> usize {
        self.mask.first().map_or(0, Vec::len)
    }

    pub fn mask(&self, ue: usize) -> &[bool] {
        &self.mask[ue]
    }

    pub fn is_selected(&self, ue: usize, antenna: usize) -> bool {
        self.mask[ue][antenna]
    }

    /// `|U_k|`.
    pub fn size(&self, ue: usize) -> usize {
        self.mask[ue].iter().filter(|&&b| b).count()
    }

    pub fn sizes(&self) -> Vec<usize> {
        (0..self.ues()).map(|k| self.size(k)).collect()
    }

    pub fn selected(&self, ue: usize) -> Vec<usize> {
        self.mask[ue]
            .iter()
            .enumerate()
            .filter_map(|(m, &b)| b.then_some(m))
            .collect()
    }

    /// Rows for the listed UEs, in the given order.
    pub fn select_ues(&self, ues: &[usize]) -> Self {
        Self {
            mask: ues.iter().map(|&k| self.mask[k].clone()).collect(),
        }
    }
}

/// Running mean; exact when all values are equal, so a constant matrix
/// selects every antenna at its own threshold.
fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut avg = 0.0;
    for (i, v) in values.enumerate() {
        avg += (v - avg) / (i + 1) as f64;
    }
    avg
}

/// First index of the largest value.
fn argmax(values: impl Iterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

fn threshold_masks<F>(ues: usize, antennas: usize, metric: F, alpha: f64) -> ClusterAssignment
where
    F: Fn(usize, usize) -> f64,
{
    let mask = (0..ues)
        .map(|k| {
            let mut row: Vec<bool> = (0..antennas).map(|m| metric(k, m) >= alpha).collect();
            if let Some(best) = argmax((0..antennas).map(|m| metric(k, m))) {
                row[best] = true;
            }
            row
        })
        .collect();
    ClusterAssignment { mask }
}

/// Mean large-scale gain over all antennas and UEs.
pub fn lsf_threshold(beta: &DMatrix<f64>) -> f64 {
    mean(beta.iter().copied())
}

/// `U_k = {m : beta_mk >= alpha} ∪ {argmax_m beta_mk}`. `beta` is `M x K`.
pub fn lsf_clusters(beta: &DMatrix<f64>, alpha: f64) -> ClusterAssignment {
    threshold_masks(beta.ncols(), beta.nrows(), |k, m| beta[(m, k)], alpha)
}

/// Mean per-link rate over all UEs and antennas.
pub fn sr_threshold(sr: &RateMatrix) -> f64 {
    mean(sr.sr.iter().copied())
}

/// `U_k = {m : SR_km >= alpha} ∪ {argmax_m SR_km}`.
pub fn sr_clusters(sr: &RateMatrix, alpha: f64) -> ClusterAssignment {
    threshold_masks(sr.ues(), sr.antennas(), |k, m| sr.get(k, m), alpha)
}

/// Target cluster size for augmentation: the ceiling of the mean size.
pub fn coverage_target(clusters: &ClusterAssignment) -> usize {
    let total: usize = clusters.sizes().iter().sum();
    total.div_ceil(clusters.ues().max(1))
}

/// Raises every under-supported UE (fewer antennas than the ceiling of the
/// mean cluster size) to that size by adding its best unselected antennas in
/// decreasing rate order. Other UEs are left untouched.
pub fn bsr_augment(clusters: &ClusterAssignment, sr: &RateMatrix) -> ClusterAssignment {
    let target = coverage_target(clusters);
    let mut out = clusters.clone();
    for (k, row) in out.mask.iter_mut().enumerate() {
        let have = row.iter().filter(|&&b| b).count();
        if have >= target {
            continue;
        }
        let mut free: Vec<usize> = (0..row.len()).filter(|&m| !row[m]).collect();
        // stable sort keeps the lowest index first among equal rates
        free.sort_by(|&a, &b| sr.get(k, b).total_cmp(&sr.get(k, a)));
        for m in free.into_iter().take(target - have) {
            row[m] = true;
        }
    }
    out
}

/// Rate-threshold clustering followed by coverage augmentation.
pub fn bsr_clusters(sr: &RateMatrix) -> ClusterAssignment {
    bsr_augment(&sr_clusters(sr, sr_threshold(sr)), sr)
}

/// LSF clustering at the mean-gain threshold.
pub fn lsf_default_clusters(beta: &DMatrix<f64>) -> ClusterAssignment {
    lsf_clusters(beta, lsf_threshold(beta))
}

/// `g_ak = A_k g_k`: zeroes the unselected antennas of each UE column.
pub fn apply_mask(g: &DMatrix<C64>, clusters: &ClusterAssignment) -> Result<DMatrix<C64>> {
    if g.ncols() != clusters.ues() || g.nrows() != clusters.antennas() {
        return Err(Error::Dimension(format!(
            "channel {:?} vs {} masks of length {}",
            g.shape(),
            clusters.ues(),
            clusters.antennas()
        )));
    }
    let mut out = g.clone();
    for k in 0..g.ncols() {
        for (m, &keep) in clusters.mask(k).iter().enumerate() {
            if !keep {
                out[(m, k)] = C64::new(0.0, 0.0);
            }
        }
    }
    Ok(out)
}
