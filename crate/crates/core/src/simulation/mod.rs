//! Synthetic benchmark problems and recovery scores.

mod metrics;
mod transforms;

pub use metrics::{scaled_l1, score_structure, ConfusionCounts, MetricsReport, StructureScores};
pub use transforms::{apply_transforms, MarginalTransform, TRANSFORM_CYCLE};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Normal, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::EdgeMatrix;
use crate::linalg;
use crate::rng::rng_from_seed;

/// End diagonal entries of the AR(1) precision.
pub const AR1_END_DIAGONAL: f64 = 1.9608;
/// Interior diagonal entries of the AR(1) precision, (1 + ρ²)/(1 − ρ²) at ρ = 0.7.
pub const AR1_INTERIOR_DIAGONAL: f64 = 2.9216;
pub const AR1_OFF_DIAGONAL: f64 = -1.3725;
/// Off-diagonal values of the AR(4) precision at lags 1 through 4.
pub const AR4_BANDS: [f64; 4] = [0.2, 0.2, 0.2, 0.1];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrecisionKind {
    Ar1,
    Ar4,
    /// Random sparse Cholesky factor whose product has the given expected
    /// fraction of non-zero off-diagonal entries.
    PercentSparse {
        fraction: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionSpec {
    pub kind: PrecisionKind,
    pub p: usize,
    pub seed: u64,
}

/// Builds the true precision matrix Ω of a design.
pub fn generate_precision(spec: &PrecisionSpec) -> Result<DMatrix<f64>> {
    let p = spec.p;
    if p == 0 {
        return Err(Error::argument("dimension must be at least 1"));
    }
    let omega = match spec.kind {
        PrecisionKind::Ar1 => DMatrix::from_fn(p, p, |i, j| match i.abs_diff(j) {
            0 if i == 0 || i == p - 1 => AR1_END_DIAGONAL,
            0 => AR1_INTERIOR_DIAGONAL,
            1 => AR1_OFF_DIAGONAL,
            _ => 0.0,
        }),
        PrecisionKind::Ar4 => DMatrix::from_fn(p, p, |i, j| match i.abs_diff(j) {
            0 => 1.0,
            lag @ 1..=4 => AR4_BANDS[lag - 1],
            _ => 0.0,
        }),
        PrecisionKind::PercentSparse { fraction } => {
            if !(fraction > 0.0 && fraction < 1.0) {
                return Err(Error::argument(format!(
                    "sparsity fraction must lie in (0, 1), got {fraction}"
                )));
            }
            let rate = factor_fill_rate(p, fraction);
            let mut rng = rng_from_seed(spec.seed);
            let diag = Normal::new(1.0, 0.1).expect("valid normal");
            let mut l = DMatrix::zeros(p, p);
            for i in 0..p {
                l[(i, i)] = loop {
                    let v: f64 = rng.sample(diag);
                    if v > 0.0 {
                        break v;
                    }
                };
                for j in 0..i {
                    if rng.random::<f64>() < rate {
                        l[(i, j)] = rng.sample(StandardNormal);
                    }
                }
            }
            &l * l.transpose()
        }
    };
    if !linalg::is_spd(&omega) {
        return Err(Error::numeric(format!(
            "{:?} precision with p = {p} is not positive definite; choose a larger dimension or another design",
            spec.kind
        )));
    }
    Ok(omega)
}

/// Expected off-diagonal fill of L̃L̃ᵀ when each strictly-lower entry of L̃ is
/// non-zero independently with probability `rate`.
///
/// Entry (i, j), i > j, of the product vanishes iff L̃_ij = 0 and no column
/// k < j has both L̃_ik and L̃_jk non-zero.
pub fn expected_fill(p: usize, rate: f64) -> f64 {
    if p < 2 {
        return 0.0;
    }
    let pairs = (p * (p - 1) / 2) as f64;
    let zero: f64 = (0..p - 1)
        .map(|j| (p - 1 - j) as f64 * (1.0 - rate) * (1.0 - rate * rate).powi(j as i32))
        .sum();
    1.0 - zero / pairs
}

/// Inverts [`expected_fill`] in `rate` by bisection.
pub fn factor_fill_rate(p: usize, fraction: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if expected_fill(p, mid) < fraction {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Fraction of off-diagonal pairs with a non-zero entry.
pub fn realized_fill(omega: &DMatrix<f64>) -> f64 {
    let p = omega.nrows();
    if p < 2 {
        return 0.0;
    }
    EdgeMatrix::support_of(omega).edge_count() as f64 / (p * (p - 1) / 2) as f64
}

/// Ψ = AΩA with A² = diag(Ω⁻¹): the precision of the correlation matrix.
pub fn inverse_correlation(omega: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sigma = linalg::spd_inverse(omega, "Omega")?;
    let a: Vec<f64> = sigma.diagonal().iter().map(|v| v.sqrt()).collect();
    Ok(DMatrix::from_fn(omega.nrows(), omega.ncols(), |k, d| {
        a[k] * omega[(k, d)] * a[d]
    }))
}

/// Conditional independence graph encoded by the zeros of Ω.
pub fn true_edges(omega: &DMatrix<f64>) -> EdgeMatrix {
    EdgeMatrix::support_of(omega)
}

/// Equally spaced means from 0 to 5.
pub fn mean_grid(p: usize) -> Vec<f64> {
    match p {
        0 => vec![],
        1 => vec![5.0],
        _ => (0..p).map(|j| 5.0 * j as f64 / (p - 1) as f64).collect(),
    }
}

/// A simulated data set: the Gaussian draws and their distorted observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    pub y_true: DMatrix<f64>,
    pub x: DMatrix<f64>,
    pub transforms: Vec<MarginalTransform>,
}

/// Draws n rows from N(μ, Ω⁻¹) and maps column j through a strictly
/// increasing CDF from [`TRANSFORM_CYCLE`], assigned round-robin.
pub fn sample_observations(omega: &DMatrix<f64>, n: usize, seed: u64) -> Result<Observations> {
    let y_true = sample_gaussian(omega, n, seed)?;
    let transforms: Vec<MarginalTransform> = (0..omega.nrows())
        .map(|j| TRANSFORM_CYCLE[j % TRANSFORM_CYCLE.len()])
        .collect();
    let x = apply_transforms(&y_true, &transforms);
    Ok(Observations {
        y_true,
        x,
        transforms,
    })
}

/// Rows i.i.d. N(μ, Ω⁻¹) with μ from [`mean_grid`].
pub fn sample_gaussian(omega: &DMatrix<f64>, n: usize, seed: u64) -> Result<DMatrix<f64>> {
    let p = omega.nrows();
    let l = linalg::cholesky(omega, "Omega")?.l();
    let mut rng = rng_from_seed(seed);
    let z = DMatrix::from_fn(p, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    // Lᵀ y = z gives Cov(y) = (LLᵀ)⁻¹
    let centered = l
        .transpose()
        .solve_upper_triangular(&z)
        .ok_or_else(|| Error::numeric("singular Cholesky factor"))?;
    let mu = mean_grid(p);
    Ok(DMatrix::from_fn(n, p, |i, j| centered[(j, i)] + mu[j]))
}
