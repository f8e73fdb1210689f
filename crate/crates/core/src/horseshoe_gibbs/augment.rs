//! Exact Gaussian posterior draws for one Cholesky regression by data
//! augmentation.
//!
//! Target: β ~ N(A⁻¹Xᵀy, σ²A⁻¹) with A = XᵀX + σ²D⁻¹ and a diagonal prior
//! covariance D. With Φ = X/σ and α = y/σ the sampler draws t ~ N(0, D) and
//! δ ~ N(0, Iₙ), sets v = Φt + δ, solves (ΦDΦᵀ + Iₙ)w = α − v and returns
//! β = t + DΦᵀw.
//!
//! The n × n solve is used when n ≤ q. Otherwise the same w-step is carried
//! out through the push-through identity DΦᵀ(ΦDΦᵀ + Iₙ)⁻¹ = (D⁻¹ + ΦᵀΦ)⁻¹Φᵀ,
//! a q × q Cholesky solve; both routes return the same β for the same (t, δ).

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Which linear system carries the w-step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveRoute {
    /// Cholesky of the n × n matrix ΦDΦᵀ + Iₙ.
    Observations,
    /// Cholesky of the q × q matrix D⁻¹ + ΦᵀΦ.
    Coefficients,
    /// `Observations` when n ≤ q, else `Coefficients`.
    Auto,
}

/// Prior scales for one regression: `prior_var[k]` is D_kk and
/// `prior_prec[k]` its reciprocal, supplied separately so that neither
/// overflows when the other is extreme.
#[derive(Debug, Clone)]
pub struct GaussianPrior {
    pub prior_var: DVector<f64>,
    pub prior_prec: DVector<f64>,
}

impl GaussianPrior {
    pub fn from_variances(var: DVector<f64>) -> Self {
        let prec = var.map(|v| 1.0 / v);
        Self {
            prior_var: var,
            prior_prec: prec,
        }
    }
}

/// One exact draw of β for the regression of `response` on `predictors`
/// with residual variance `sigma2`.
///
/// `gram`, when given, must equal `predictorsᵀ predictors`.
pub fn sample_gaussian_posterior<R: Rng + ?Sized>(
    predictors: &DMatrix<f64>,
    response: &DVector<f64>,
    sigma2: f64,
    prior: &GaussianPrior,
    gram: Option<&DMatrix<f64>>,
    route: SolveRoute,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let (n, q) = predictors.shape();
    let t = DVector::from_fn(q, |k, _| {
        let z: f64 = rng.sample(StandardNormal);
        prior.prior_var[k].sqrt() * z
    });
    let delta = DVector::from_fn(n, |_, _| rng.sample(StandardNormal));
    augmented_step(predictors, response, sigma2, prior, gram, route, &t, &delta)
}

/// Deterministic part of the sampler given the auxiliary draws `t` and `delta`.
#[allow(clippy::too_many_arguments)]
pub fn augmented_step(
    predictors: &DMatrix<f64>,
    response: &DVector<f64>,
    sigma2: f64,
    prior: &GaussianPrior,
    gram: Option<&DMatrix<f64>>,
    route: SolveRoute,
    t: &DVector<f64>,
    delta: &DVector<f64>,
) -> Result<DVector<f64>> {
    let (n, q) = predictors.shape();
    if response.len() != n || t.len() != q || delta.len() != n || prior.prior_var.len() != q {
        return Err(Error::Dimension(
            "regression operands disagree in size".into(),
        ));
    }
    if q == 0 {
        return Ok(DVector::zeros(0));
    }
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::numeric(format!(
            "residual variance {sigma2} is not positive"
        )));
    }
    let sigma = sigma2.sqrt();
    // v = Φt + δ and r = α − v
    let v = predictors * t / sigma + delta;
    let r = response / sigma - v;

    let use_observations = match route {
        SolveRoute::Observations => true,
        SolveRoute::Coefficients => false,
        SolveRoute::Auto => n <= q,
    };
    let beta = if use_observations {
        // K = Φ D Φᵀ + I
        let scaled = DMatrix::from_fn(n, q, |i, k| {
            predictors[(i, k)] * prior.prior_var[k] / sigma2
        });
        let mut k_mat = &scaled * predictors.transpose();
        for i in 0..n {
            k_mat[(i, i)] += 1.0;
        }
        let chol = k_mat
            .cholesky()
            .ok_or_else(|| Error::numeric("augmentation system is not positive definite"))?;
        let w = chol.solve(&r);
        let phi_t_w = predictors.tr_mul(&w) / sigma;
        t + phi_t_w.component_mul(&prior.prior_var)
    } else {
        let mut m = match gram {
            Some(g) => g / sigma2,
            None => predictors.tr_mul(predictors) / sigma2,
        };
        for k in 0..q {
            m[(k, k)] += prior.prior_prec[k];
        }
        let chol = m
            .cholesky()
            .ok_or_else(|| Error::numeric("posterior precision is not positive definite"))?;
        t + chol.solve(&(predictors.tr_mul(&r) / sigma))
    };
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::numeric("non-finite regression coefficient draw"));
    }
    Ok(beta)
}

/// Closed-form posterior mean and covariance, for checking the sampler.
pub fn posterior_moments(
    predictors: &DMatrix<f64>,
    response: &DVector<f64>,
    sigma2: f64,
    prior: &GaussianPrior,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let mut a = predictors.tr_mul(predictors);
    for k in 0..a.nrows() {
        a[(k, k)] += sigma2 * prior.prior_prec[k];
    }
    let a_inv = a
        .try_inverse()
        .ok_or_else(|| Error::numeric("posterior precision is singular"))?;
    let mean = &a_inv * predictors.tr_mul(response);
    Ok((mean, a_inv * sigma2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    fn problem(n: usize, q: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>, GaussianPrior) {
        let mut rng = rng_from_seed(seed);
        let x = DMatrix::from_fn(n, q, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let var = DVector::from_fn(q, |k, _| 0.1 + k as f64 * 0.7);
        (x, y, GaussianPrior::from_variances(var))
    }

    #[test]
    fn routes_agree_for_fixed_auxiliaries() {
        for &(n, q) in &[(20, 3), (5, 8), (6, 6)] {
            let (x, y, prior) = problem(n, q, 4);
            let mut rng = rng_from_seed(9);
            let t = DVector::from_fn(q, |_, _| rng.sample::<f64, _>(StandardNormal));
            let delta = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let a = augmented_step(
                &x,
                &y,
                0.8,
                &prior,
                None,
                SolveRoute::Observations,
                &t,
                &delta,
            )
            .unwrap();
            let b = augmented_step(
                &x,
                &y,
                0.8,
                &prior,
                None,
                SolveRoute::Coefficients,
                &t,
                &delta,
            )
            .unwrap();
            let g = x.tr_mul(&x);
            let c = augmented_step(
                &x,
                &y,
                0.8,
                &prior,
                Some(&g),
                SolveRoute::Coefficients,
                &t,
                &delta,
            )
            .unwrap();
            assert!((&a - &b).amax() < 1e-10, "n={n} q={q}");
            assert!((&b - &c).amax() < 1e-12);
        }
    }

    #[test]
    fn empty_regression_is_a_no_op() {
        let x = DMatrix::zeros(4, 0);
        let y = DVector::from_element(4, 1.0);
        let prior = GaussianPrior::from_variances(DVector::zeros(0));
        let mut rng = rng_from_seed(1);
        let beta = sample_gaussian_posterior(&x, &y, 1.0, &prior, None, SolveRoute::Auto, &mut rng)
            .unwrap();
        assert_eq!(beta.len(), 0);
    }

    #[test]
    fn bad_variance_is_numeric_error() {
        let (x, y, prior) = problem(5, 2, 1);
        let mut rng = rng_from_seed(1);
        let err = sample_gaussian_posterior(&x, &y, 0.0, &prior, None, SolveRoute::Auto, &mut rng);
        assert!(matches!(err, Err(Error::Numeric(_))));
    }
}
