//! Horseshoe-regularized Cholesky regressions and assembly of the inverse
//! correlation matrix.
//!
//! Writing Ω = LLᵀ with L lower triangular turns N(0, Ω⁻¹) into the
//! regressions Y_d = Σ_{k>d} β_kd Y_k + ε_d, ε_d ~ N(0, σ_d²), where
//! β_kd = −l_kd / l_dd and σ_d = 1 / l_dd. Each coefficient carries the prior
//!
//! ```text
//! β_kd | λ_d², b_kd, σ_d² ~ N(0, σ_d² b_kd c² λ_d² / (p² k))
//! ```
//!
//! with inverse-gamma auxiliaries a_d, h_kd for the global scale λ_d² and the
//! local scales b_kd, and σ_d² ~ IG(0.01, 0.01). `k` is the 1-based global
//! index of the predictor column.

pub mod augment;
mod chain;

pub use augment::{GaussianPrior, SolveRoute};
pub use chain::{run_chain, run_chain_on_ranks, ChainConfig, ChainDiagnostics, ChainOutput};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use crate::error::{Error, Result};

/// Shape and rate of the σ_d² prior.
pub const SIGMA2_PRIOR: f64 = 0.01;

/// Inverse-gamma law with density ∝ x^(−shape−1) exp(−rate / x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseGamma {
    pub shape: f64,
    pub rate: f64,
}

impl InverseGamma {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::numeric(format!(
                "inverse-gamma shape {shape} is not positive"
            )));
        }
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::numeric(format!(
                "inverse-gamma rate {rate} is not positive"
            )));
        }
        Ok(Self { shape, rate })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        let g: f64 = if self.shape == 1.0 {
            Exp1.sample(rng)
        } else {
            Gamma::new(self.shape, 1.0)
                .map_err(|e| Error::numeric(e.to_string()))?
                .sample(rng)
        };
        let x = self.rate / g;
        if x > 0.0 && x.is_finite() {
            Ok(x)
        } else {
            Err(Error::numeric(format!(
                "inverse-gamma draw {x} out of range (shape {}, rate {})",
                self.shape, self.rate
            )))
        }
    }

    /// `rate / (shape − 1)`; infinite when shape ≤ 1.
    pub fn mean(&self) -> f64 {
        if self.shape > 1.0 {
            self.rate / (self.shape - 1.0)
        } else {
            f64::INFINITY
        }
    }
}

/// Regression parameters of one column d.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnParams {
    /// β_kd for k = d+1..p, in order.
    pub beta: DVector<f64>,
    pub lambda2: f64,
    pub a: f64,
    /// Local scales b_kd, aligned with `beta`.
    pub b: DVector<f64>,
    pub h: DVector<f64>,
    pub sigma2: f64,
}

/// Full parameter state of the horseshoe Cholesky model.
#[derive(Debug, Clone, PartialEq)]
pub struct HorseshoeState {
    c: f64,
    columns: Vec<ColumnParams>,
}

impl HorseshoeState {
    /// All scale parameters at one and all coefficients at zero.
    pub fn new(p: usize, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::argument(format!(
                "sparsity constant c must be positive, got {c}"
            )));
        }
        let columns = (0..p)
            .map(|d| {
                let q = p - d - 1;
                ColumnParams {
                    beta: DVector::zeros(q),
                    lambda2: 1.0,
                    a: 1.0,
                    b: DVector::from_element(q, 1.0),
                    h: DVector::from_element(q, 1.0),
                    sigma2: 1.0,
                }
            })
            .collect();
        Ok(Self { c, columns })
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn column(&self, d: usize) -> &ColumnParams {
        &self.columns[d]
    }

    pub fn column_mut(&mut self, d: usize) -> &mut ColumnParams {
        &mut self.columns[d]
    }

    /// p² k / c² for the 0-based predictor column `k0`.
    fn row_factor(&self, k0: usize) -> f64 {
        let p = self.p() as f64;
        p * p * (k0 + 1) as f64 / (self.c * self.c)
    }

    /// Prior of β_{·d} given the current scales (covariance D and its inverse).
    pub fn beta_prior(&self, d: usize) -> GaussianPrior {
        let col = &self.columns[d];
        let q = col.beta.len();
        let prec = DVector::from_fn(q, |j, _| {
            self.row_factor(d + 1 + j) / (col.sigma2 * col.lambda2 * col.b[j])
        });
        let var = DVector::from_fn(q, |j, _| {
            col.sigma2 * col.lambda2 * col.b[j] / self.row_factor(d + 1 + j)
        });
        GaussianPrior {
            prior_var: var,
            prior_prec: prec,
        }
    }

    /// Σ_k β_kd² p² k / (b_kd c²), the prior quadratic form without λ² and σ².
    fn weighted_beta_norm(&self, d: usize) -> f64 {
        let col = &self.columns[d];
        col.beta
            .iter()
            .zip(col.b.iter())
            .enumerate()
            .map(|(j, (beta, b))| beta * beta * self.row_factor(d + 1 + j) / b)
            .sum()
    }

    /// Full conditional of λ_d².
    pub fn lambda2_conditional(&self, d: usize) -> Result<InverseGamma> {
        let col = &self.columns[d];
        let q = col.beta.len() as f64;
        InverseGamma::new(
            0.5 * q + 0.5,
            0.5 * self.weighted_beta_norm(d) / col.sigma2 + 1.0 / col.a,
        )
    }

    /// Full conditional of a_d.
    pub fn a_conditional(&self, d: usize) -> Result<InverseGamma> {
        InverseGamma::new(1.0, 1.0 / self.columns[d].lambda2 + 1.0)
    }

    /// Full conditional of b_kd for the 0-based predictor column `k0 > d`.
    pub fn b_conditional(&self, k0: usize, d: usize) -> Result<InverseGamma> {
        let col = &self.columns[d];
        let j = self.local_index(k0, d)?;
        let beta = col.beta[j];
        InverseGamma::new(
            1.0,
            self.row_factor(k0) * beta * beta / (2.0 * col.sigma2 * col.lambda2) + 1.0 / col.h[j],
        )
    }

    /// Full conditional of h_kd.
    pub fn h_conditional(&self, k0: usize, d: usize) -> Result<InverseGamma> {
        let j = self.local_index(k0, d)?;
        InverseGamma::new(1.0, 1.0 / self.columns[d].b[j] + 1.0)
    }

    /// Full conditional of σ_d² given the latent data.
    pub fn sigma2_conditional(&self, d: usize, y: &DMatrix<f64>) -> Result<InverseGamma> {
        let (n, p) = y.shape();
        if p != self.p() {
            return Err(Error::Dimension(format!(
                "latent matrix has {p} columns, state has {}",
                self.p()
            )));
        }
        let col = &self.columns[d];
        let q = col.beta.len();
        let fitted = y.columns(d + 1, q) * &col.beta;
        let rss = (y.column(d) - fitted).norm_squared();
        let penalty = if q == 0 {
            0.0
        } else {
            self.weighted_beta_norm(d) / col.lambda2
        };
        InverseGamma::new(
            0.5 * (n + q) as f64 + SIGMA2_PRIOR,
            0.5 * rss + 0.5 * penalty + SIGMA2_PRIOR,
        )
    }

    fn local_index(&self, k0: usize, d: usize) -> Result<usize> {
        if d >= self.p() || k0 <= d || k0 >= self.p() {
            return Err(Error::argument(format!(
                "no coefficient at (k={k0}, d={d}) for p={}",
                self.p()
            )));
        }
        Ok(k0 - d - 1)
    }
}

/// Draws β_{k>d} for column `d`. Empty for the last column.
pub fn sample_beta_column<R: Rng + ?Sized>(
    y: &DMatrix<f64>,
    d: usize,
    state: &HorseshoeState,
    rng: &mut R,
) -> Result<DVector<f64>> {
    beta_draw(y, d, state, None, rng)
}

fn beta_draw<R: Rng + ?Sized>(
    y: &DMatrix<f64>,
    d: usize,
    state: &HorseshoeState,
    gram: Option<&DMatrix<f64>>,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let p = state.p();
    if y.ncols() != p || d >= p {
        return Err(Error::Dimension(format!(
            "column {d} out of range for {} columns",
            y.ncols()
        )));
    }
    let q = p - d - 1;
    let predictors = y.columns(d + 1, q).into_owned();
    let response = y.column(d).into_owned();
    let sub_gram = gram.map(|g| g.view((d + 1, d + 1), (q, q)).into_owned());
    augment::sample_gaussian_posterior(
        &predictors,
        &response,
        state.column(d).sigma2,
        &state.beta_prior(d),
        sub_gram.as_ref(),
        SolveRoute::Auto,
        rng,
    )
}

pub fn sample_lambda2<R: Rng + ?Sized>(
    d: usize,
    state: &HorseshoeState,
    rng: &mut R,
) -> Result<f64> {
    state.lambda2_conditional(d)?.sample(rng)
}

pub fn sample_a<R: Rng + ?Sized>(d: usize, state: &HorseshoeState, rng: &mut R) -> Result<f64> {
    state.a_conditional(d)?.sample(rng)
}

pub fn sample_b<R: Rng + ?Sized>(
    k0: usize,
    d: usize,
    state: &HorseshoeState,
    rng: &mut R,
) -> Result<f64> {
    state.b_conditional(k0, d)?.sample(rng)
}

pub fn sample_h<R: Rng + ?Sized>(
    k0: usize,
    d: usize,
    state: &HorseshoeState,
    rng: &mut R,
) -> Result<f64> {
    state.h_conditional(k0, d)?.sample(rng)
}

pub fn sample_sigma2<R: Rng + ?Sized>(
    d: usize,
    state: &HorseshoeState,
    y: &DMatrix<f64>,
    rng: &mut R,
) -> Result<f64> {
    state.sigma2_conditional(d, y)?.sample(rng)
}

/// One Gibbs pass over column `d`: β, λ², a, b, h, then σ², each conditioned
/// on the freshest values. `gram` must be YᵀY when supplied.
pub fn update_column<R: Rng + ?Sized>(
    d: usize,
    state: &mut HorseshoeState,
    y: &DMatrix<f64>,
    gram: Option<&DMatrix<f64>>,
    rng: &mut R,
) -> Result<()> {
    let p = state.p();
    if d + 1 < p {
        let beta = beta_draw(y, d, state, gram, rng)?;
        state.columns[d].beta = beta;
        state.columns[d].lambda2 = sample_lambda2(d, state, rng)?;
        state.columns[d].a = sample_a(d, state, rng)?;
        for k0 in d + 1..p {
            let b = sample_b(k0, d, state, rng)?;
            state.columns[d].b[k0 - d - 1] = b;
            let h = sample_h(k0, d, state, rng)?;
            state.columns[d].h[k0 - d - 1] = h;
        }
    }
    state.columns[d].sigma2 = sample_sigma2(d, state, y, rng)?;
    Ok(())
}

/// Cholesky factor, precision and inverse correlation matrix of one draw.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionDraw {
    pub l: DMatrix<f64>,
    pub omega: DMatrix<f64>,
    pub psi: DMatrix<f64>,
}

/// Builds L from (β, σ), then Ω = LLᵀ and Ψ = AΩA with A² = diag(Ω⁻¹).
pub fn assemble_precision(state: &HorseshoeState) -> Result<PrecisionDraw> {
    let p = state.p();
    let mut l = DMatrix::zeros(p, p);
    for d in 0..p {
        let col = state.column(d);
        let sigma = col.sigma2.sqrt();
        l[(d, d)] = 1.0 / sigma;
        for (j, beta) in col.beta.iter().enumerate() {
            l[(d + 1 + j, d)] = -beta / sigma;
        }
    }
    if l.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("Cholesky factor has non-finite entries"));
    }
    let omega = &l * l.transpose();
    // Ω⁻¹ = L⁻ᵀL⁻¹, so diag(Ω⁻¹)_d is the squared norm of column d of L⁻¹.
    let l_inv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::numeric("Cholesky factor is singular"))?;
    let scale: Vec<f64> = (0..p).map(|d| l_inv.column(d).norm()).collect();
    let psi = DMatrix::from_fn(p, p, |k, d| scale[k] * omega[(k, d)] * scale[d]);
    if psi.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric(
            "inverse correlation matrix has non-finite entries",
        ));
    }
    Ok(PrecisionDraw { l, omega, psi })
}
