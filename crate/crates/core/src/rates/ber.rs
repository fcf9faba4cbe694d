use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cluster::{apply_mask, ClusterAssignment};
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::netgen::ChannelSet;
use crate::precode::zf_precoder_or_regularized;
use crate::C64;

/// Bit-error count over a Monte Carlo run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BerEstimate {
    pub errors: u64,
    pub bits: u64,
}

impl BerEstimate {
    pub fn rate(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.bits as f64
        }
    }

    /// Binomial standard error of [`rate`](Self::rate).
    pub fn std_error(&self) -> f64 {
        let p = self.rate();
        if self.bits == 0 {
            0.0
        } else {
            (p * (1.0 - p) / self.bits as f64).sqrt()
        }
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            errors: self.errors + other.errors,
            bits: self.bits + other.bits,
        }
    }
}

/// Gray-mapped unit-energy QPSK: bit 0 on the in-phase sign, bit 1 on quadrature.
pub fn qpsk_map(b0: bool, b1: bool) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    C64::new(if b0 { -s } else { s }, if b1 { -s } else { s })
}

/// Nearest-symbol decision for [`qpsk_map`].
pub fn qpsk_detect(z: C64) -> (bool, bool) {
    (z.re < 0.0, z.im < 0.0)
}

/// Sends `n_symbols` QPSK vectors through `y = sqrt(rho) G_a^T P_a x + w` and
/// counts hard-decision bit errors.
///
/// `channel` holds the served UEs only (`M x n`). With `clusters`, the true
/// channel and the estimate are masked per UE and the zero-forcing precoder is
/// built from the masked estimate. Each UE scales its sample by its own
/// effective gain `sqrt(rho) [G_hat_a^T P_a]_kk` before deciding.
pub fn ber_monte_carlo<R: Rng + ?Sized>(
    channel: &ChannelSet,
    clusters: Option<&ClusterAssignment>,
    config: &NetworkConfig,
    rng: &mut R,
    n_symbols: usize,
) -> Result<BerEstimate> {
    if n_symbols == 0 {
        return Err(Error::InvalidExperiment("n_symbols must be >= 1".into()));
    }
    let (g, g_hat) = match clusters {
        Some(c) => (apply_mask(&channel.g, c)?, apply_mask(&channel.g_hat, c)?),
        None => (channel.g.clone(), channel.g_hat.clone()),
    };
    let n = g.ncols();
    let precoder = zf_precoder_or_regularized(&g_hat, config.power_budget)?;
    let amp = config.rho_f.sqrt();
    let link: DMatrix<C64> = (g.transpose() * &precoder.p).scale(amp);
    let gains: Vec<C64> = {
        let est = g_hat.transpose() * &precoder.p;
        (0..n).map(|k| est[(k, k)] * amp).collect()
    };
    let noise_sd = (config.noise_var / 2.0).sqrt();

    let mut out = BerEstimate::default();
    let mut bits = vec![(false, false); n];
    let mut x = DVector::<C64>::zeros(n);
    for _ in 0..n_symbols {
        for k in 0..n {
            bits[k] = (rng.random(), rng.random());
            x[k] = qpsk_map(bits[k].0, bits[k].1);
        }
        let y = &link * &x;
        for k in 0..n {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            let yk = y[k] + C64::new(re, im) * noise_sd;
            let z = if gains[k].norm() > 0.0 {
                yk / gains[k]
            } else {
                yk
            };
            let (d0, d1) = qpsk_detect(z);
            out.errors += u64::from(d0 != bits[k].0) + u64::from(d1 != bits[k].1);
        }
        out.bits += 2 * n as u64;
    }
    Ok(out)
}
