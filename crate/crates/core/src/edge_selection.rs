//! Turning posterior draws of Ψ into a graph.
//!
//! Each draw's partial correlations are compared with those of a
//! non-regularized reference, the posterior mean of Ψ under a conjugate
//! W_p(df, I) prior given the same latent draw. An entry counts as non-zero
//! in that draw when the regularized partial correlation keeps more than half
//! the magnitude of the reference one. The graph estimate is the median
//! probability model over draws.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;

pub use crate::graph::EdgeMatrix;

/// Default degrees of freedom of the Wishart reference prior.
pub const DEFAULT_WISHART_DF: f64 = 3.0;

/// −m_kd / √(m_kk m_dd) off the diagonal, 1 on it.
pub fn partial_correlations(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    linalg::cholesky(m, "partial correlation input")?;
    Ok(partials_unchecked(m))
}

fn partials_unchecked(m: &DMatrix<f64>) -> DMatrix<f64> {
    let p = m.nrows();
    let mut out = DMatrix::identity(p, p);
    for k in 0..p {
        for d in k + 1..p {
            let r = -m[(k, d)] / (m[(k, k)] * m[(d, d)]).sqrt();
            out[(k, d)] = r;
            out[(d, k)] = r;
        }
    }
    out
}

/// Posterior mean (n + df)(I + YᵀY)⁻¹ of Ψ under a W_p(df, I) prior.
pub fn wishart_posterior_mean(y: &DMatrix<f64>, df: f64) -> Result<DMatrix<f64>> {
    wishart_mean_from_gram(&y.tr_mul(y), y.nrows(), df)
}

pub(crate) fn wishart_mean_from_gram(
    gram: &DMatrix<f64>,
    n: usize,
    df: f64,
) -> Result<DMatrix<f64>> {
    if !(df > 0.0) || !df.is_finite() {
        return Err(Error::argument(format!(
            "Wishart degrees of freedom must be positive, got {df}"
        )));
    }
    let p = gram.nrows();
    let inv = linalg::spd_inverse(&(DMatrix::identity(p, p) + gram), "I + S")?;
    Ok(inv * (n as f64 + df))
}

/// Partial correlations of the Wishart reference posterior mean for one
/// latent draw.
pub fn wishart_reference(y: &DMatrix<f64>, df: f64) -> Result<DMatrix<f64>> {
    Ok(partials_unchecked(&wishart_posterior_mean(y, df)?))
}

/// Per-draw indicator of a non-zero entry: |ρ_kd| / |φ_kd| > 0.5.
///
/// φ = 0 with ρ ≠ 0 counts as an infinite ratio (edge); ρ = φ = 0 does not.
pub fn zero_one_threshold(rho: &DMatrix<f64>, phi: &DMatrix<f64>) -> Result<EdgeMatrix> {
    if rho.shape() != phi.shape() || !rho.is_square() {
        return Err(Error::Dimension(format!(
            "partial correlation matrices differ in shape: {:?} vs {:?}",
            rho.shape(),
            phi.shape()
        )));
    }
    if let Some(v) = rho.iter().chain(phi.iter()).find(|v| !v.is_finite()) {
        return Err(Error::numeric(format!(
            "non-finite partial correlation {v}"
        )));
    }
    Ok(EdgeMatrix::from_fn(rho.nrows(), |k, d| {
        rho[(k, d)].abs() > 0.5 * phi[(k, d)].abs()
    }))
}

/// Running tally of per-draw indicator matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdDraws {
    p: usize,
    counts: Vec<u32>,
    draws: u32,
}

impl ThresholdDraws {
    pub fn new(p: usize) -> Self {
        Self {
            p,
            counts: vec![0; p * p],
            draws: 0,
        }
    }

    pub fn push(&mut self, indicator: &EdgeMatrix) {
        assert_eq!(indicator.p(), self.p, "indicator dimension mismatch");
        for (i, j) in indicator.edges() {
            self.counts[i * self.p + j] += 1;
            self.counts[j * self.p + i] += 1;
        }
        self.draws += 1;
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.draws as usize
    }

    pub fn is_empty(&self) -> bool {
        self.draws == 0
    }

    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.p + j]
    }

    /// Fraction of draws in which each entry was declared non-zero.
    pub fn inclusion_probabilities(&self) -> DMatrix<f64> {
        let m = self.draws.max(1) as f64;
        DMatrix::from_fn(self.p, self.p, |i, j| self.count(i, j) as f64 / m)
    }
}

impl<'a> FromIterator<&'a EdgeMatrix> for ThresholdDraws {
    fn from_iter<I: IntoIterator<Item = &'a EdgeMatrix>>(iter: I) -> Self {
        let mut iter = iter.into_iter().peekable();
        let p = iter.peek().map_or(0, |g| g.p());
        let mut acc = ThresholdDraws::new(p);
        iter.for_each(|g| acc.push(g));
        acc
    }
}

/// Edge iff the entry was non-zero in strictly more than half of the draws.
pub fn median_probability_edges(draws: &ThresholdDraws) -> Result<EdgeMatrix> {
    if draws.is_empty() {
        return Err(Error::argument(
            "median probability model needs at least one draw",
        ));
    }
    Ok(EdgeMatrix::from_fn(draws.p, |i, j| {
        2 * draws.count(i, j) > draws.draws
    }))
}
