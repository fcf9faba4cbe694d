//! Small dense helpers over Hermitian forms.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::C64;

/// Relative pivot below which a Cholesky factor is treated as singular.
pub const PIVOT_TOL: f64 = 1e-12;

/// `(A + A^H) / 2`.
pub fn hermitian_part(a: &DMatrix<C64>) -> DMatrix<C64> {
    (a + a.adjoint()).scale(0.5)
}

/// Cholesky factorization of the Hermitian part of `a`, rejecting factors
/// whose smallest squared pivot falls below `PIVOT_TOL` times the largest.
pub fn hermitian_cholesky(a: &DMatrix<C64>) -> Option<Cholesky<C64, Dyn>> {
    let chol = Cholesky::new(hermitian_part(a))?;
    let pivots = chol.l_dirty().diagonal();
    let (lo, hi) = pivots
        .iter()
        .map(|d| d.norm_sqr())
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), p| {
            (lo.min(p), hi.max(p))
        });
    (pivots.is_empty() || (lo.is_finite() && lo > PIVOT_TOL * hi)).then_some(chol)
}

/// Natural log-determinant of a Hermitian positive definite matrix.
pub fn logdet_hpd(a: &DMatrix<C64>) -> Option<f64> {
    let chol = Cholesky::new(hermitian_part(a))?;
    Some(
        chol.l_dirty()
            .diagonal()
            .iter()
            .map(|d| 2.0 * d.re.ln())
            .sum(),
    )
}

/// `G^T conj(G)`: the Gram matrix of the effective downlink channel.
pub fn downlink_gram(g: &DMatrix<C64>) -> DMatrix<C64> {
    g.tr_mul(&g.conjugate())
}

pub fn frobenius_sq(a: &DMatrix<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn all_finite(a: &DMatrix<C64>) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}
