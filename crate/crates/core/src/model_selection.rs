//! BIC-based choice of the sparsity constant c.
//!
//! For each candidate c the estimated graph fixes a zero pattern, the Gaussian
//! likelihood is maximized under that pattern, and
//! `BIC = 2(−n log det Ψ̂ + tr(Ψ̂S)) + k log n` with k = p + #edges.
//!
//! The constrained maximization runs block coordinate descent on the
//! covariance W: for each node j, the regression of column j on its graph
//! neighbours is solved against the current W, and the j-th row of W is
//! refreshed. Non-neighbour entries of Ψ̂ = W⁻¹ are then zero by construction
//! when Ψ̂ is read off the final regressions.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::EdgeMatrix;
use crate::linalg;

/// Stopping rule of [`constrained_mle`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleOptions {
    /// Largest change of any covariance entry in one sweep that counts as converged.
    pub step_tol: f64,
    /// Required max-norm of the objective gradient over the free entries.
    pub gradient_tol: f64,
    pub max_sweeps: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            step_tol: 1e-7,
            gradient_tol: 1e-6,
            max_sweeps: 500,
        }
    }
}

/// Outcome of the BIC step for one candidate c.
#[derive(Debug, Clone, PartialEq)]
pub struct BicResult {
    pub c: f64,
    pub psi_mle: DMatrix<f64>,
    pub edges: EdgeMatrix,
    /// Number of free parameters: p diagonal entries plus one per edge.
    pub k: usize,
    pub bic: f64,
}

impl BicResult {
    /// Runs the constrained MLE and evaluates the BIC.
    pub fn evaluate(c: f64, s: &DMatrix<f64>, edges: &EdgeMatrix, n: usize) -> Result<Self> {
        let psi_mle = constrained_mle(s, edges, n)?;
        let bic = bic(&psi_mle, s, n, edges)?;
        Ok(Self {
            c,
            psi_mle,
            edges: edges.clone(),
            k: s.nrows() + edges.edge_count(),
            bic,
        })
    }
}

/// −n log det Ψ + tr(ΨS).
pub fn mle_objective(psi: &DMatrix<f64>, s: &DMatrix<f64>, n: usize) -> Result<f64> {
    let chol = linalg::cholesky(psi, "Psi")?;
    let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let trace = psi.component_mul(s).sum();
    Ok(-(n as f64) * log_det + trace)
}

/// Largest |∂objective/∂Ψ| = |S − nΨ⁻¹| over the diagonal and the edges.
pub fn projected_gradient(
    psi: &DMatrix<f64>,
    s: &DMatrix<f64>,
    n: usize,
    edges: &EdgeMatrix,
) -> Result<f64> {
    let cov = linalg::spd_inverse(psi, "Psi")?;
    let p = psi.nrows();
    let g = |i: usize, j: usize| (s[(i, j)] - n as f64 * cov[(i, j)]).abs();
    let diag = (0..p).map(|i| g(i, i)).fold(0.0, f64::max);
    Ok(edges.edges().map(|(i, j)| g(i, j)).fold(diag, f64::max))
}

/// Minimizes −n log det Ψ + tr(ΨS) over SPD Ψ with Ψ_kd = 0 off the graph.
pub fn constrained_mle(s: &DMatrix<f64>, edges: &EdgeMatrix, n: usize) -> Result<DMatrix<f64>> {
    constrained_mle_with(s, edges, n, &MleOptions::default())
}

pub fn constrained_mle_with(
    s: &DMatrix<f64>,
    edges: &EdgeMatrix,
    n: usize,
    opts: &MleOptions,
) -> Result<DMatrix<f64>> {
    let p = s.nrows();
    if !s.is_square() || edges.p() != p {
        return Err(Error::Dimension(format!(
            "S is {:?} but the graph has {} nodes",
            s.shape(),
            edges.p()
        )));
    }
    if n == 0 {
        return Err(Error::argument("sample count must be positive"));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::numeric("S has non-finite entries"));
    }
    if let Some(d) = (0..p).find(|&d| !(s[(d, d)] > 0.0)) {
        return Err(Error::Infeasible(format!(
            "S has non-positive diagonal at {d}"
        )));
    }

    let sample = s / n as f64;
    let mut w = sample.clone();
    let neighbours: Vec<Vec<usize>> = (0..p).map(|j| edges.neighbours(j)).collect();
    let mut last_gradient = f64::INFINITY;

    for sweep in 1..=opts.max_sweeps {
        let mut max_change = 0.0_f64;
        for j in 0..p {
            let beta = neighbour_regression(&w, &sample, j, &neighbours[j])?;
            for i in (0..p).filter(|&i| i != j) {
                let new = neighbours[j]
                    .iter()
                    .zip(beta.iter())
                    .map(|(&k, b)| w[(i, k)] * b)
                    .sum::<f64>();
                max_change = max_change.max((new - w[(i, j)]).abs());
                w[(i, j)] = new;
                w[(j, i)] = new;
            }
        }
        if max_change < opts.step_tol {
            let psi = precision_from_covariance(&w, &sample, &neighbours)?;
            last_gradient = projected_gradient(&psi, s, n, edges)?;
            if last_gradient < opts.gradient_tol {
                return Ok(psi);
            }
        }
        if sweep == opts.max_sweeps {
            if !last_gradient.is_finite() {
                let psi = precision_from_covariance(&w, &sample, &neighbours)?;
                last_gradient = projected_gradient(&psi, s, n, edges)?;
            }
            return Err(Error::NoConvergence {
                iterations: sweep,
                gradient: last_gradient,
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: 0,
        gradient: last_gradient,
    })
}

/// Solves W[nb, nb] β = s[nb, j].
fn neighbour_regression(
    w: &DMatrix<f64>,
    sample: &DMatrix<f64>,
    j: usize,
    nb: &[usize],
) -> Result<DVector<f64>> {
    if nb.is_empty() {
        return Ok(DVector::zeros(0));
    }
    let w11 = DMatrix::from_fn(nb.len(), nb.len(), |a, b| w[(nb[a], nb[b])]);
    let s12 = DVector::from_fn(nb.len(), |a, _| sample[(nb[a], j)]);
    let chol = w11.cholesky().ok_or_else(|| {
        Error::Infeasible(format!(
            "covariance of the neighbourhood of node {j} is singular"
        ))
    })?;
    Ok(chol.solve(&s12))
}

/// Reads Ψ off the converged regressions: ψ_jj = 1 / (s_jj − w_{nb,j}ᵀβ) and
/// ψ_kj = −β_k ψ_jj for neighbours k, zero elsewhere.
fn precision_from_covariance(
    w: &DMatrix<f64>,
    sample: &DMatrix<f64>,
    neighbours: &[Vec<usize>],
) -> Result<DMatrix<f64>> {
    let p = w.nrows();
    let mut psi = DMatrix::zeros(p, p);
    for j in 0..p {
        let nb = &neighbours[j];
        let beta = neighbour_regression(w, sample, j, nb)?;
        let explained: f64 = nb
            .iter()
            .zip(beta.iter())
            .map(|(&k, b)| w[(k, j)] * b)
            .sum();
        let resid = sample[(j, j)] - explained;
        if !(resid > 0.0) {
            return Err(Error::Infeasible(format!(
                "node {j} is perfectly explained by its neighbours"
            )));
        }
        psi[(j, j)] = 1.0 / resid;
        for (&k, b) in nb.iter().zip(beta.iter()) {
            psi[(k, j)] = -b / resid;
        }
    }
    // Average the two one-sided estimates; structural zeros stay exactly zero.
    let psi = linalg::symmetrize(&psi);
    if !linalg::is_spd(&psi) {
        return Err(Error::numeric(
            "constrained estimate is not positive definite",
        ));
    }
    Ok(psi)
}

/// 2(−n log det Ψ̂ + tr(Ψ̂S)) + k log n with k = p + #edges.
pub fn bic(psi_mle: &DMatrix<f64>, s: &DMatrix<f64>, n: usize, edges: &EdgeMatrix) -> Result<f64> {
    let k = psi_mle.nrows() + edges.edge_count();
    let value = 2.0 * mle_objective(psi_mle, s, n)? + k as f64 * (n as f64).ln();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::numeric(format!("BIC is not finite: {value}")))
    }
}

/// Smallest BIC; exact ties go to the smaller c.
pub fn select_c(results: &[BicResult]) -> Result<&BicResult> {
    results
        .iter()
        .min_by(|a, b| a.bic.total_cmp(&b.bic).then(a.c.total_cmp(&b.c)))
        .ok_or_else(|| Error::argument("no BIC results to select from"))
}
