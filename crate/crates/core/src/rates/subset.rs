use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, downlink_gram, hermitian_cholesky, hermitian_part, logdet_hpd};
use crate::precode::REGULARIZATION;
use crate::C64;

/// Zero-forcing sum-rate of arbitrary UE subsets from one channel estimate.
///
/// With `P0 = conj(G_S) X` and `X = Gram_S^{-1}` (or its loaded inverse),
/// every term of the log-det rate is a function of the two `|S| x |S|`
/// blocks `Gram_S = G_hat_S^T conj(G_hat_S)` and `C_S = G_tilde_S^T conj(G_hat_S)`:
/// `G_hat^T P0 = Gram X`, `G_tilde^T P0 = C X`, `||P0||_F^2 = tr(X^H Gram X)`.
/// Both blocks are cut from `K x K` matrices computed once, so a subset
/// evaluation costs `O(|S|^3)` instead of `O(M |S|^2)`.
#[derive(Debug, Clone)]
pub struct SubsetRates {
    gram: DMatrix<C64>,
    cross: DMatrix<C64>,
    power_budget: f64,
    rho_f: f64,
    noise_var: f64,
}

impl SubsetRates {
    pub fn new(
        g_hat: &DMatrix<C64>,
        g_tilde: &DMatrix<C64>,
        power_budget: f64,
        rho_f: f64,
        noise_var: f64,
    ) -> Result<Self> {
        if g_hat.shape() != g_tilde.shape() {
            return Err(Error::Dimension(format!(
                "g_hat {:?} vs g_tilde {:?}",
                g_hat.shape(),
                g_tilde.shape()
            )));
        }
        if !(all_finite(g_hat) && all_finite(g_tilde)) {
            return Err(Error::NonFinite("subset-rate channels"));
        }
        if !(noise_var > 0.0 && noise_var.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise_var must be > 0 (got {noise_var})"
            )));
        }
        Ok(Self {
            gram: downlink_gram(g_hat),
            cross: g_tilde.tr_mul(&g_hat.conjugate()),
            power_budget,
            rho_f,
            noise_var,
        })
    }

    /// `||g_hat_k||^2`.
    pub fn channel_power(&self, ue: usize) -> f64 {
        self.gram[(ue, ue)].re
    }

    /// Sum-rate of the UEs in `set` served by a zero-forcing precoder built
    /// on their estimate. Returns the rate and whether diagonal loading was
    /// needed.
    pub fn rate_flagged(&self, set: &[usize]) -> (f64, bool) {
        let l = set.len();
        if l == 0 {
            return (0.0, false);
        }
        let gram = self.gram.select_rows(set).select_columns(set);
        let cross = self.cross.select_rows(set).select_columns(set);

        let (x, regularized) = match hermitian_cholesky(&gram) {
            Some(chol) => (chol.inverse(), false),
            None => {
                let trace: f64 = gram.diagonal().iter().map(|z| z.re).sum();
                let delta = (REGULARIZATION * trace / l as f64).max(f64::MIN_POSITIVE);
                let loaded = hermitian_part(&gram) + DMatrix::<C64>::identity(l, l).scale(delta);
                let chol =
                    Cholesky::new(loaded).expect("diagonally loaded Gram is positive definite");
                (chol.inverse(), true)
            }
        };
        let eff = &gram * &x;
        let p0_power = (x.adjoint() * &eff).trace().re;
        if !(p0_power > 0.0 && p0_power.is_finite()) {
            return (0.0, regularized);
        }
        let gain = self.rho_f * self.power_budget / p0_power;
        let leak = &cross * &x;

        let mut noise = (&leak * leak.adjoint()).scale(gain);
        for i in 0..l {
            noise[(i, i)] += C64::new(self.noise_var, 0.0);
        }
        let total = (&eff * eff.adjoint()).scale(gain) + &noise;
        let rate = match (logdet_hpd(&total), logdet_hpd(&noise)) {
            (Some(a), Some(b)) => ((a - b) / std::f64::consts::LN_2).max(0.0),
            _ => 0.0,
        };
        (rate, regularized)
    }

    pub fn rate(&self, set: &[usize]) -> f64 {
        self.rate_flagged(set).0
    }
}
