//! Small dense helpers shared by the sampler, the thresholding rule and the
//! constrained MLE.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

/// Cholesky factorization that reports failure as a numeric error.
pub fn cholesky(m: &DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    if !m.is_square() {
        return Err(Error::numeric(format!("{what} is not square")));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric(format!("{what} has non-finite entries")));
    }
    Cholesky::new(m.clone())
        .ok_or_else(|| Error::numeric(format!("{what} is not positive definite")))
}

/// Inverse of a symmetric positive definite matrix, symmetrized.
pub fn spd_inverse(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let inv = cholesky(m, what)?.inverse();
    Ok(symmetrize(&inv))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn is_spd(m: &DMatrix<f64>) -> bool {
    m.is_square() && m.iter().all(|v| v.is_finite()) && Cholesky::new(m.clone()).is_some()
}

/// Pearson correlation matrix of the columns of `y`.
pub fn correlation(y: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, p) = y.shape();
    if n < 2 {
        return Err(Error::Dimension(format!("need at least 2 rows, got {n}")));
    }
    let means: Vec<f64> = (0..p).map(|j| y.column(j).mean()).collect();
    let mut centered = y.clone();
    for (j, mean) in means.iter().enumerate() {
        centered.column_mut(j).add_scalar_mut(-mean);
    }
    let cov = centered.transpose() * &centered;
    let mut corr = DMatrix::zeros(p, p);
    for k in 0..p {
        for d in 0..p {
            let denom = (cov[(k, k)] * cov[(d, d)]).sqrt();
            if denom <= 0.0 || !denom.is_finite() {
                return Err(Error::numeric(format!(
                    "column {} has zero variance",
                    if cov[(k, k)] <= 0.0 { k } else { d }
                )));
            }
            corr[(k, d)] = cov[(k, d)] / denom;
        }
    }
    for d in 0..p {
        corr[(d, d)] = 1.0;
    }
    Ok(corr)
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
