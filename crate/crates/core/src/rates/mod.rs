//! Achievable rates: log-det sum-rate, per-link rates and Monte Carlo BER.

mod ber;
mod subset;

pub use ber::{ber_monte_carlo, qpsk_detect, qpsk_map, BerEstimate};
pub use subset::SubsetRates;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{all_finite, logdet_hpd};
use crate::precode::{zf_precoder_or_regularized, Precoder};
use crate::C64;

/// Numeric warnings attached to a rate evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RateFlags {
    /// The precoder needed diagonal loading.
    pub regularized_precoder: bool,
    /// A slightly negative log-det difference was clamped to zero.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// `log2 det(R + I)` in bits/s/Hz.
    pub sum_rate: f64,
    /// Per-UE `log2(1 + SINR_k)` treating all other streams and the CSI
    /// error as noise. Sums to `sum_rate` when the effective channel is
    /// diagonal and the CSI is perfect.
    pub per_ue_rate: Vec<f64>,
    pub flags: RateFlags,
}

/// Per-link rates `SR[k][m]`, `K x M`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    pub sr: DMatrix<f64>,
}

impl RateMatrix {
    pub fn ues(&self) -> usize {
        self.sr.nrows()
    }

    pub fn antennas(&self) -> usize {
        self.sr.ncols()
    }

    pub fn get(&self, ue: usize, antenna: usize) -> f64 {
        self.sr[(ue, antenna)]
    }
}

const NEGATIVE_SLACK: f64 = 1e-9;

/// Sum-rate `log2 det(R + I)` with
/// `R = rho G_hat^T P P^H conj(G_hat) (rho G_tilde^T P P^H conj(G_tilde) + s^2 I)^{-1}`.
///
/// Evaluated as `log det(A + B) - log det(B)` over the two Hermitian forms
/// `A = rho (G_hat^T P)(G_hat^T P)^H` and `B = rho (G_tilde^T P)(G_tilde^T P)^H + s^2 I`,
/// which never forms an inverse.
pub fn sum_rate(
    g_hat: &DMatrix<C64>,
    g_tilde: &DMatrix<C64>,
    precoder: &Precoder,
    rho_f: f64,
    noise_var: f64,
) -> Result<RateReport> {
    let p = &precoder.p;
    if g_hat.shape() != g_tilde.shape() || g_hat.nrows() != p.nrows() || g_hat.ncols() != p.ncols()
    {
        return Err(Error::Dimension(format!(
            "g_hat {:?}, g_tilde {:?}, precoder {:?}",
            g_hat.shape(),
            g_tilde.shape(),
            p.shape()
        )));
    }
    if !(all_finite(g_hat) && all_finite(g_tilde) && all_finite(p)) || !rho_f.is_finite() {
        return Err(Error::NonFinite("sum-rate inputs"));
    }
    if !(noise_var > 0.0 && noise_var.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "noise_var must be > 0 (got {noise_var})"
        )));
    }

    let n = g_hat.ncols();
    let eff = g_hat.transpose() * p;
    let leak = g_tilde.transpose() * p;
    let signal = (&eff * eff.adjoint()).scale(rho_f);
    let mut interference = (&leak * leak.adjoint()).scale(rho_f);
    for i in 0..n {
        interference[(i, i)] += C64::new(noise_var, 0.0);
    }
    let total = signal + &interference;
    let ld_total = logdet_hpd(&total).ok_or(Error::NonFinite("signal-plus-noise covariance"))?;
    let ld_noise = logdet_hpd(&interference).ok_or(Error::NonFinite("noise covariance"))?;
    let mut rate = (ld_total - ld_noise) / std::f64::consts::LN_2;

    let mut flags = RateFlags {
        regularized_precoder: precoder.regularized,
        clamped: false,
    };
    if rate < 0.0 {
        debug_assert!(rate >= -NEGATIVE_SLACK, "negative sum-rate {rate}");
        flags.clamped = true;
        rate = 0.0;
    }

    let per_ue_rate = (0..n)
        .map(|k| {
            let own = eff[(k, k)].norm_sqr();
            let cross: f64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| eff[(k, j)].norm_sqr())
                .sum();
            let err: f64 = leak.row(k).iter().map(|z| z.norm_sqr()).sum();
            let sinr = rho_f * own / (rho_f * (cross + err) + noise_var);
            (1.0 + sinr).log2()
        })
        .collect();

    Ok(RateReport {
        sum_rate: rate,
        per_ue_rate,
        flags,
    })
}

/// Zero-forcing sum-rate: builds the precoder from `g_hat` (with the
/// regularized fallback) and evaluates [`sum_rate`].
pub fn zf_sum_rate(
    g_hat: &DMatrix<C64>,
    g_tilde: &DMatrix<C64>,
    power_budget: f64,
    rho_f: f64,
    noise_var: f64,
) -> Result<RateReport> {
    let precoder = zf_precoder_or_regularized(g_hat, power_budget)?;
    sum_rate(g_hat, g_tilde, &precoder, rho_f, noise_var)
}

/// Per-link rates
/// `SR_km = log2(1 + s |g_hat_km|^2 ||p_k||^2 / (s |g_tilde_km|^2 ||p_k||^2 + noise_var))`,
/// where `s` is the link power scaling (`sqrt(rho_f)` in the published form).
///
/// `precoder` has one column per UE (`M x K`).
pub fn per_link_rates(
    g_hat: &DMatrix<C64>,
    g_tilde: &DMatrix<C64>,
    precoder: &DMatrix<C64>,
    link_power: f64,
    noise_var: f64,
) -> Result<RateMatrix> {
    if g_hat.shape() != g_tilde.shape() || g_hat.shape() != precoder.shape() {
        return Err(Error::Dimension(format!(
            "g_hat {:?}, g_tilde {:?}, precoder {:?}",
            g_hat.shape(),
            g_tilde.shape(),
            precoder.shape()
        )));
    }
    if !(all_finite(g_hat) && all_finite(g_tilde) && all_finite(precoder))
        || !link_power.is_finite()
    {
        return Err(Error::NonFinite("per-link rate inputs"));
    }
    let (m_count, k_count) = g_hat.shape();
    let mut sr = DMatrix::<f64>::zeros(k_count, m_count);
    for k in 0..k_count {
        let pk: f64 = precoder.column(k).iter().map(|z| z.norm_sqr()).sum();
        for m in 0..m_count {
            let num = link_power * g_hat[(m, k)].norm_sqr() * pk;
            let den = link_power * g_tilde[(m, k)].norm_sqr() * pk + noise_var;
            sr[(k, m)] = (1.0 + num / den).log2();
        }
    }
    Ok(RateMatrix { sr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precode::zf_precoder;
    use crate::rng::SimRng;
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};

    fn random(rows: usize, cols: usize, var: f64, seed: u64) -> DMatrix<C64> {
        let beta = DMatrix::from_element(rows, cols, var);
        crate::netgen::draw_channel(&beta, &mut SimRng::seed_from_u64(seed))
    }

    fn as_precoder(p: DMatrix<C64>) -> Precoder {
        Precoder {
            p,
            power_budget: 1.0,
            regularized: false,
        }
    }

    #[test]
    fn diagonal_reduction() {
        let a = [0.5, 1.5, 2.0];
        let g_hat = DMatrix::from_diagonal(&DVector::from_iterator(
            3,
            a.iter().map(|&x| C64::new(x, 0.0)),
        ));
        let zero = DMatrix::zeros(3, 3);
        let p = as_precoder(DMatrix::identity(3, 3));
        let (rho, s2) = (2.0, 0.5);
        let r = sum_rate(&g_hat, &zero, &p, rho, s2).unwrap();
        let want: f64 = a.iter().map(|x| (1.0 + rho * x * x / s2).log2()).sum();
        assert!((r.sum_rate - want).abs() < 1e-12);
        let per: f64 = r.per_ue_rate.iter().sum();
        assert!((per - want).abs() < 1e-12);
    }

    #[test]
    fn single_stream_gives_two_bits() {
        let g_hat = DMatrix::from_element(1, 1, C64::new(3f64.sqrt(), 0.0));
        let zero = DMatrix::zeros(1, 1);
        let p = as_precoder(DMatrix::identity(1, 1));
        let r = sum_rate(&g_hat, &zero, &p, 1.0, 1.0).unwrap();
        assert!((r.sum_rate - 2.0).abs() < 1e-12);
    }

    #[test]
    fn per_link_examples() {
        let one = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        let zero = DMatrix::zeros(1, 1);
        let sr = per_link_rates(&one, &zero, &one, 1.0, 1.0).unwrap();
        assert!((sr.get(0, 0) - 1.0).abs() < 1e-15);
        let sr = per_link_rates(&zero, &one, &one, 1.0, 1.0).unwrap();
        assert_eq!(sr.get(0, 0), 0.0);
    }

    #[test]
    fn per_link_matches_scalar_formula() {
        let mut rng = SimRng::seed_from_u64(21);
        let g_hat = random(5, 3, 1.0, 22);
        let g_tilde = random(5, 3, 0.1, 23);
        let p = random(5, 3, 0.3, 24);
        let rho: f64 = rng.random_range(0.1..10.0);
        let s2: f64 = rng.random_range(0.1..2.0);
        let sr = per_link_rates(&g_hat, &g_tilde, &p, rho.sqrt(), s2).unwrap();
        for k in 0..3 {
            let pk: f64 = (0..5).map(|m| p[(m, k)].norm_sqr()).sum();
            for m in 0..5 {
                let h = g_hat[(m, k)].re.powi(2) + g_hat[(m, k)].im.powi(2);
                let e = g_tilde[(m, k)].re.powi(2) + g_tilde[(m, k)].im.powi(2);
                let want = (1.0 + rho.sqrt() * h * pk / (rho.sqrt() * e * pk + s2)).log2();
                assert!((sr.get(k, m) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn non_finite_inputs_rejected() {
        let mut g = random(3, 2, 1.0, 25);
        let t = random(3, 2, 0.1, 26);
        let p = zf_precoder(&g, 1.0).unwrap();
        g[(1, 1)] = C64::new(f64::INFINITY, 0.0);
        assert!(matches!(
            sum_rate(&g, &t, &p, 1.0, 1.0),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            per_link_rates(&g, &t, &p.p, 1.0, 1.0),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn sum_rate_non_increasing_in_noise() {
        let g_hat = random(8, 4, 1.0, 27);
        let g_tilde = random(8, 4, 0.05, 28);
        let p = zf_precoder(&g_hat, 1.0).unwrap();
        let mut last = f64::INFINITY;
        for i in 0..30 {
            let s2 = 0.01 * 1.4f64.powi(i);
            let r = sum_rate(&g_hat, &g_tilde, &p, 3.0, s2).unwrap().sum_rate;
            assert!(r >= 0.0 && r <= last + 1e-12, "{s2}: {r} > {last}");
            last = r;
        }
    }

    #[test]
    fn permuting_ues_permutes_link_rows() {
        let g_hat = random(4, 3, 1.0, 29);
        let g_tilde = random(4, 3, 0.1, 30);
        let p = random(4, 3, 1.0, 31);
        let order = [2, 0, 1];
        let a = per_link_rates(&g_hat, &g_tilde, &p, 1.0, 1.0).unwrap();
        let b = per_link_rates(
            &g_hat.select_columns(&order),
            &g_tilde.select_columns(&order),
            &p.select_columns(&order),
            1.0,
            1.0,
        )
        .unwrap();
        for (i, &k) in order.iter().enumerate() {
            assert_eq!(a.sr.row(k), b.sr.row(i));
        }
    }
}
