//! Zero-forcing precoding under a total (Frobenius) power budget.

use nalgebra::{Cholesky, DMatrix};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, downlink_gram, frobenius_sq, hermitian_cholesky, hermitian_part};
use crate::C64;

/// Diagonal loading used when the effective channel is near-singular,
/// relative to the mean Gram diagonal.
pub const REGULARIZATION: f64 = 1e-8;

/// Linear precoder `P` (`M x n`), scaled so `||P||_F^2 == power_budget`.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    pub p: DMatrix<C64>,
    pub power_budget: f64,
    /// Set when the inverse needed diagonal loading.
    pub regularized: bool,
}

impl Precoder {
    pub fn power(&self) -> f64 {
        frobenius_sq(&self.p)
    }

    fn normalized(p0: DMatrix<C64>, power_budget: f64, regularized: bool) -> Self {
        let norm = frobenius_sq(&p0);
        // an all-zero channel leaves nothing to scale
        let p = if norm > 0.0 {
            p0.scale((power_budget / norm).sqrt())
        } else {
            p0
        };
        Self {
            p,
            power_budget,
            regularized,
        }
    }
}

fn check_inputs(g: &DMatrix<C64>, power_budget: f64) -> Result<()> {
    if !all_finite(g) {
        return Err(Error::NonFinite("channel estimate"));
    }
    if !(power_budget > 0.0 && power_budget.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "power budget must be > 0 (got {power_budget})"
        )));
    }
    Ok(())
}

fn loaded_factor(gram: &DMatrix<C64>) -> Cholesky<C64, nalgebra::Dyn> {
    let dim = gram.nrows();
    let trace: f64 = gram.diagonal().iter().map(|z| z.re).sum();
    let delta = REGULARIZATION * trace / dim as f64;
    let loaded = hermitian_part(gram)
        + DMatrix::<C64>::identity(dim, dim).scale(delta.max(f64::MIN_POSITIVE));
    Cholesky::new(loaded).expect("diagonally loaded Gram is positive definite")
}

/// Zero-forcing precoder `P = c * conj(G) (G^T conj(G))^{-1}` for the
/// effective estimate `g_hat_eff` (`M x n`, `n <= M`), so `G^T P = c I`.
pub fn zf_precoder(g_hat_eff: &DMatrix<C64>, power_budget: f64) -> Result<Precoder> {
    check_inputs(g_hat_eff, power_budget)?;
    let (rows, cols) = g_hat_eff.shape();
    if cols > rows {
        return Err(Error::RankDeficient { rows, cols });
    }
    let gram = downlink_gram(g_hat_eff);
    let chol = hermitian_cholesky(&gram).ok_or(Error::RankDeficient { rows, cols })?;
    let p0 = g_hat_eff.conjugate() * chol.inverse();
    Ok(Precoder::normalized(p0, power_budget, false))
}

/// [`zf_precoder`], falling back to a diagonally loaded inverse when the
/// effective channel is rank deficient. The fallback is flagged on the result.
pub fn zf_precoder_or_regularized(g_hat_eff: &DMatrix<C64>, power_budget: f64) -> Result<Precoder> {
    match zf_precoder(g_hat_eff, power_budget) {
        Err(Error::RankDeficient { .. }) => {
            let chol = loaded_factor(&downlink_gram(g_hat_eff));
            let p0 = g_hat_eff.conjugate() * chol.inverse();
            Ok(Precoder::normalized(p0, power_budget, true))
        }
        other => other,
    }
}

/// Pseudo-inverse precoder `pinv(G^T)` for any number of UEs.
///
/// Coincides with zero forcing when `K <= M`; for `K > M` it is the
/// minimum-norm least-squares inverse `(conj(G) G^T)^{-1} conj(G)`.
pub fn pinv_precoder(g_hat: &DMatrix<C64>, power_budget: f64) -> Result<Precoder> {
    let (rows, cols) = g_hat.shape();
    if cols <= rows {
        return zf_precoder_or_regularized(g_hat, power_budget);
    }
    check_inputs(g_hat, power_budget)?;
    let conj = g_hat.conjugate();
    let gram = &conj * g_hat.transpose();
    let (chol, regularized) = match hermitian_cholesky(&gram) {
        Some(c) => (c, false),
        None => (loaded_factor(&gram), true),
    };
    let p0 = chol.solve(&conj);
    Ok(Precoder::normalized(p0, power_budget, regularized))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;
    use rand::SeedableRng;

    fn random(rows: usize, cols: usize, seed: u64) -> DMatrix<C64> {
        let beta = DMatrix::from_element(rows, cols, 1.0);
        crate::netgen::draw_channel(&beta, &mut SimRng::seed_from_u64(seed))
    }

    #[test]
    fn identity_channel() {
        let g = DMatrix::<C64>::identity(3, 3);
        let p = zf_precoder(&g, 6.0).unwrap();
        let c = (6.0f64 / 3.0).sqrt();
        assert!((p.p.clone() - DMatrix::<C64>::identity(3, 3).scale(c)).norm() < 1e-12);
        assert!(!p.regularized);
    }

    #[test]
    fn zero_forcing_residual() {
        let g = random(4, 2, 11);
        let p = zf_precoder(&g, 1.0).unwrap();
        let eff = g.transpose() * &p.p;
        let c = eff[(0, 0)];
        assert!(c.im.abs() < 1e-12 && c.re > 0.0);
        let resid = (eff - DMatrix::<C64>::identity(2, 2).scale(c.re)).norm();
        assert!(resid < 1e-9, "{resid}");
        assert!((p.power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_the_channel_keeps_direction_and_power() {
        let g = random(6, 3, 12);
        let a = zf_precoder(&g, 2.5).unwrap();
        let b = zf_precoder(&g.scale(2.0), 2.5).unwrap();
        assert!((a.p - &b.p).norm() < 1e-10);
        assert!((b.power() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn rank_deficiency_is_reported_and_regularized() {
        let mut g = random(4, 2, 13);
        let first = g.column(0).into_owned();
        g.set_column(1, &first.scale(2.0));
        assert!(matches!(
            zf_precoder(&g, 1.0),
            Err(Error::RankDeficient { .. })
        ));
        let p = zf_precoder_or_regularized(&g, 1.0).unwrap();
        assert!(p.regularized);
        assert!((p.power() - 1.0).abs() < 1e-9);
        // more UEs than antennas can never be zero-forced
        assert!(matches!(
            zf_precoder(&random(2, 3, 1), 1.0),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn rejects_non_finite() {
        let mut g = random(3, 2, 14);
        g[(0, 0)] = C64::new(f64::NAN, 0.0);
        assert!(matches!(zf_precoder(&g, 1.0), Err(Error::NonFinite(_))));
    }

    #[test]
    fn pinv_matches_zf_when_tall_and_is_least_squares_when_wide() {
        let g = random(5, 3, 15);
        assert_eq!(
            pinv_precoder(&g, 1.0).unwrap(),
            zf_precoder(&g, 1.0).unwrap()
        );

        let wide = random(3, 7, 16);
        let p = pinv_precoder(&wide, 1.0).unwrap();
        assert!(!p.regularized);
        assert!((p.power() - 1.0).abs() < 1e-12);
        // pinv(A) with A = G^T satisfies A pinv(A) A = A up to the scale c
        let a = wide.transpose();
        let apa = &a * &p.p * &a;
        let ratio = apa[(0, 0)] / a[(0, 0)];
        assert!((apa - a.scale(ratio.re)).norm() < 1e-9);
    }
}
