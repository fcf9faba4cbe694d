//! Network geometry, large-scale fading and channel realizations.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::config::NetworkConfig;
use crate::rng::{realization_rng, Lane};
use crate::C64;

/// AP and UE positions in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub ap_pos: Vec<[f64; 2]>,
    pub ue_pos: Vec<[f64; 2]>,
}

impl Geometry {
    pub fn distance(&self, ap: usize, ue: usize) -> f64 {
        let [ax, ay] = self.ap_pos[ap];
        let [ux, uy] = self.ue_pos[ue];
        (ax - ux).hypot(ay - uy)
    }
}

/// One channel realization. All matrices are `M x K` with antenna `m` of
/// AP `l` at row `l * N + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub beta: DMatrix<f64>,
    pub g: DMatrix<C64>,
    pub g_hat: DMatrix<C64>,
    pub g_tilde: DMatrix<C64>,
}

impl ChannelSet {
    pub fn antennas(&self) -> usize {
        self.g.nrows()
    }

    pub fn ues(&self) -> usize {
        self.g.ncols()
    }

    /// Column-reduced channel for the listed UEs, in the given order.
    pub fn select_ues(&self, ues: &[usize]) -> ChannelSet {
        ChannelSet {
            beta: self.beta.select_columns(ues),
            g: self.g.select_columns(ues),
            g_hat: self.g_hat.select_columns(ues),
            g_tilde: self.g_tilde.select_columns(ues),
        }
    }
}

/// Draws AP and UE positions i.i.d. uniform over the square.
pub fn place_network<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Geometry {
    let side = config.area_side_m;
    let point = |rng: &mut R| [side * rng.random::<f64>(), side * rng.random::<f64>()];
    let ap_pos = (0..config.aps).map(|_| point(rng)).collect();
    let ue_pos = (0..config.ues).map(|_| point(rng)).collect();
    Geometry { ap_pos, ue_pos }
}

/// Three-slope path loss in dB (positive loss).
///
/// Flat inside `d0`, 20 dB/decade between `d0` and `d1`, 35 dB/decade beyond.
pub fn path_loss_db(distance_m: f64, config: &NetworkConfig) -> f64 {
    let km = |d: f64| (d / 1000.0).log10();
    let (d0, d1) = (config.d0_m, config.d1_m);
    let base = config.pl_constant_db;
    if distance_m > d1 {
        base + 35.0 * km(distance_m)
    } else if distance_m > d0 {
        base + 15.0 * km(d1) + 20.0 * km(distance_m)
    } else {
        base + 15.0 * km(d1) + 20.0 * km(d0)
    }
}

/// Large-scale coefficients `beta` (`M x K`). Shadowing is drawn once per
/// AP-UE pair, and only beyond `d1`; all antennas of an AP share the value.
pub fn large_scale_fading<R: Rng + ?Sized>(
    geom: &Geometry,
    config: &NetworkConfig,
    rng: &mut R,
) -> DMatrix<f64> {
    let n_ant = config.antennas_per_ap;
    let (l_count, k_count) = (geom.ap_pos.len(), geom.ue_pos.len());
    let shadow = (config.shadow_sigma_db > 0.0)
        .then(|| Normal::new(0.0, config.shadow_sigma_db).expect("sigma validated"));

    let mut per_ap = DMatrix::<f64>::zeros(l_count, k_count);
    for k in 0..k_count {
        for l in 0..l_count {
            let d = geom.distance(l, k);
            // always draw so the stream layout does not depend on geometry
            let z = shadow.as_ref().map_or(0.0, |s| s.sample(rng));
            let z = if d > config.d1_m { z } else { 0.0 };
            per_ap[(l, k)] = 10f64.powf((-path_loss_db(d, config) + z) / 10.0);
        }
    }
    DMatrix::from_fn(l_count * n_ant, k_count, |m, k| per_ap[(m / n_ant, k)])
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(s * re, s * im)
}

/// True channel `g = sqrt(beta) * h` with `h ~ CN(0, 1)` i.i.d.
pub fn draw_channel<R: Rng + ?Sized>(beta: &DMatrix<f64>, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(beta.nrows(), beta.ncols(), |m, k| {
        complex_normal(rng, 1.0) * beta[(m, k)].sqrt()
    })
}

/// Independent estimate / error split with variances `(1 - tau^2) beta` and
/// `tau^2 beta`. Returns `(g_hat, g_tilde, g)` with `g = g_hat + g_tilde`.
pub fn split_csi<R: Rng + ?Sized>(
    beta: &DMatrix<f64>,
    config: &NetworkConfig,
    rng: &mut R,
) -> (DMatrix<C64>, DMatrix<C64>, DMatrix<C64>) {
    let tau2 = config.csi_tau * config.csi_tau;
    let (rows, cols) = beta.shape();
    let mut g_hat = DMatrix::zeros(rows, cols);
    let mut g_tilde = DMatrix::zeros(rows, cols);
    for k in 0..cols {
        for m in 0..rows {
            let b = beta[(m, k)];
            g_hat[(m, k)] = complex_normal(rng, 1.0) * ((1.0 - tau2) * b).sqrt();
            g_tilde[(m, k)] = complex_normal(rng, 1.0) * (tau2 * b).sqrt();
        }
    }
    let g = &g_hat + &g_tilde;
    (g_hat, g_tilde, g)
}

/// Geometry and channels for realization `index` of a seeded experiment.
pub fn realize(config: &NetworkConfig, index: u64) -> (Geometry, ChannelSet) {
    realize_in_drop(config, index, index)
}

/// Small-scale realization `index` over the large-scale drop of realization
/// `drop`: positions and shadowing come from `drop`, fading from `index`.
pub fn realize_in_drop(config: &NetworkConfig, drop: u64, index: u64) -> (Geometry, ChannelSet) {
    let seed = config.seed;
    let geom = place_network(config, &mut realization_rng(seed, drop, Lane::Geometry));
    let beta = large_scale_fading(
        &geom,
        config,
        &mut realization_rng(seed, drop, Lane::Shadowing),
    );
    let (g_hat, g_tilde, g) = split_csi(
        &beta,
        config,
        &mut realization_rng(seed, index, Lane::Fading),
    );
    (
        geom,
        ChannelSet {
            beta,
            g,
            g_hat,
            g_tilde,
        },
    )
}
