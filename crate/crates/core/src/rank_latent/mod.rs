//! Rank constraints of the observed data and Gibbs updates of the latent
//! Gaussian matrix.
//!
//! Only the per-column orderings of the data enter the sampler. Two data sets
//! whose columns are related by strictly increasing maps produce identical
//! [`RankConstraints`] and therefore identical chains under the same seed.
//!
//! Ties follow the extended rank likelihood: observations with bit-identical
//! values form a group with no mutual ordering, and each member is bounded by
//! the nearest strictly smaller and strictly larger groups.

mod truncnorm;

pub use truncnorm::{sample_truncated_normal, standard_truncated};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg;
use crate::normal;

/// n × p matrix of latent Gaussian scores.
pub type LatentMatrix = DMatrix<f64>;

#[derive(Debug, Clone, PartialEq)]
struct ColumnRanks {
    /// Observation indices sorted by ascending value (stable on ties).
    order: Vec<usize>,
    /// `groups[g]..groups[g + 1]` is the range of `order` holding tie group `g`.
    groups: Vec<usize>,
    /// Mid-rank of each observation, 1-based.
    rank: Vec<f64>,
}

/// Per-column orderings of an n × p data matrix, with tie structure.
#[derive(Debug, Clone, PartialEq)]
pub struct RankConstraints {
    n: usize,
    columns: Vec<ColumnRanks>,
}

impl RankConstraints {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.columns.len()
    }

    /// Observation indices of column `j` in ascending order.
    pub fn order(&self, j: usize) -> &[usize] {
        &self.columns[j].order
    }

    /// Rank of observation `i` in column `j`; tied observations share their
    /// average rank.
    pub fn rank(&self, i: usize, j: usize) -> f64 {
        self.columns[j].rank[i]
    }

    /// Tie groups of column `j` in ascending order. Untied observations form
    /// singleton groups.
    pub fn tie_groups(&self, j: usize) -> impl Iterator<Item = &[usize]> + '_ {
        let col = &self.columns[j];
        col.groups.windows(2).map(move |w| &col.order[w[0]..w[1]])
    }

    pub fn has_ties(&self) -> bool {
        self.columns.iter().any(|c| c.groups.len() - 1 < self.n)
    }

    /// Checks that `y` respects every strict ordering of the observed data.
    pub fn is_satisfied_by(&self, y: &LatentMatrix) -> bool {
        if y.shape() != (self.n, self.p()) {
            return false;
        }
        self.columns.iter().enumerate().all(|(j, col)| {
            col.groups.windows(3).all(|w| {
                let below = col.order[w[0]..w[1]]
                    .iter()
                    .map(|&i| y[(i, j)])
                    .fold(f64::NEG_INFINITY, f64::max);
                let above = col.order[w[1]..w[2]]
                    .iter()
                    .map(|&i| y[(i, j)])
                    .fold(f64::INFINITY, f64::min);
                below < above
            }) && y.column(j).iter().all(|v| v.is_finite())
        })
    }
}

/// Ranks every column of `x`.
pub fn compute_ranks(x: &DMatrix<f64>) -> Result<RankConstraints> {
    let (n, p) = x.shape();
    if n < 2 {
        return Err(Error::Dimension(format!(
            "need at least 2 observations, got {n}"
        )));
    }
    if p < 1 {
        return Err(Error::Dimension("need at least 1 variable".into()));
    }
    for j in 0..p {
        for i in 0..n {
            if !x[(i, j)].is_finite() {
                return Err(Error::Input {
                    row: i,
                    col: j,
                    reason: format!("non-finite value {}", x[(i, j)]),
                });
            }
        }
    }
    let columns = (0..p)
        .map(|j| {
            let col = x.column(j);
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
            let mut groups = vec![0];
            for s in 1..n {
                if col[order[s]].to_bits() != col[order[s - 1]].to_bits() {
                    groups.push(s);
                }
            }
            groups.push(n);
            let mut rank = vec![0.0; n];
            for w in groups.windows(2) {
                // positions w[0]..w[1] hold ranks w[0]+1 ..= w[1]
                let mid = (w[0] + 1 + w[1]) as f64 / 2.0;
                for &i in &order[w[0]..w[1]] {
                    rank[i] = mid;
                }
            }
            ColumnRanks {
                order,
                groups,
                rank,
            }
        })
        .collect();
    Ok(RankConstraints { n, columns })
}

/// Normal scores Φ⁻¹(rank / (n + 1)) of the ranks.
pub fn init_latents(ranks: &RankConstraints) -> LatentMatrix {
    let n = ranks.n();
    DMatrix::from_fn(n, ranks.p(), |i, j| {
        normal::quantile(ranks.rank(i, j) / (n as f64 + 1.0))
    })
}

/// Mean and variance of the full conditional of `y[(i, d)]` given the rest of
/// row `i`, for latent rows distributed N(0, Ψ⁻¹).
pub fn latent_conditional(psi: &DMatrix<f64>, y: &LatentMatrix, i: usize, d: usize) -> (f64, f64) {
    let var = 1.0 / psi[(d, d)];
    let dot: f64 = (0..psi.ncols())
        .filter(|&j| j != d)
        .map(|j| psi[(d, j)] * y[(i, j)])
        .sum();
    (-var * dot, var)
}

/// One systematic-scan sweep over all latent entries.
///
/// Column by column, entries are redrawn in ascending rank order from their
/// full conditional N(μ, 1/ψ_dd) with μ = −ψ_dd⁻¹ Ψ_{d,−d} y_{i,−d}, truncated
/// between the current values of the neighbouring tie groups.
pub fn gibbs_update_latents<R: Rng + ?Sized>(
    y: &mut LatentMatrix,
    psi: &DMatrix<f64>,
    ranks: &RankConstraints,
    rng: &mut R,
) -> Result<()> {
    if y.shape() != (ranks.n(), ranks.p()) {
        return Err(Error::Dimension(format!(
            "latent matrix is {:?}, ranks describe {}x{}",
            y.shape(),
            ranks.n(),
            ranks.p()
        )));
    }
    sweep(y, psi, Some(ranks), rng)
}

/// Same sweep as [`gibbs_update_latents`] with every bound at ±∞, i.e. exact
/// Gibbs sampling from N(0, Ψ⁻¹) row by row.
pub fn gibbs_update_unconstrained<R: Rng + ?Sized>(
    y: &mut LatentMatrix,
    psi: &DMatrix<f64>,
    rng: &mut R,
) -> Result<()> {
    sweep(y, psi, None, rng)
}

fn sweep<R: Rng + ?Sized>(
    y: &mut LatentMatrix,
    psi: &DMatrix<f64>,
    ranks: Option<&RankConstraints>,
    rng: &mut R,
) -> Result<()> {
    let (n, p) = y.shape();
    if psi.shape() != (p, p) {
        return Err(Error::Dimension(format!(
            "Psi is {:?}, expected {p}x{p}",
            psi.shape()
        )));
    }
    linalg::cholesky(psi, "Psi")?;

    let mut cond_mean = vec![0.0; n];
    for d in 0..p {
        let psi_dd = psi[(d, d)];
        let var = 1.0 / psi_dd;
        let sd = var.sqrt();
        cond_mean.iter_mut().for_each(|m| *m = 0.0);
        for j in (0..p).filter(|&j| j != d) {
            let w = psi[(d, j)];
            if w != 0.0 {
                for (m, yij) in cond_mean.iter_mut().zip(y.column(j).iter()) {
                    *m += w * yij;
                }
            }
        }
        cond_mean.iter_mut().for_each(|m| *m *= -var);

        match ranks {
            None => {
                for (i, mu) in cond_mean.iter().enumerate() {
                    let z: f64 = rng.sample(StandardNormal);
                    y[(i, d)] = mu + sd * z;
                }
            }
            Some(ranks) => {
                let col = &ranks.columns[d];
                let n_groups = col.groups.len() - 1;
                for g in 0..n_groups {
                    let members = &col.order[col.groups[g]..col.groups[g + 1]];
                    for &i in members {
                        let lower = if g == 0 {
                            f64::NEG_INFINITY
                        } else {
                            col.order[col.groups[g - 1]..col.groups[g]]
                                .iter()
                                .map(|&k| y[(k, d)])
                                .fold(f64::NEG_INFINITY, f64::max)
                        };
                        let upper = if g + 1 == n_groups {
                            f64::INFINITY
                        } else {
                            col.order[col.groups[g + 1]..col.groups[g + 2]]
                                .iter()
                                .map(|&k| y[(k, d)])
                                .fold(f64::INFINITY, f64::min)
                        };
                        if !(lower < upper) {
                            return Err(Error::Invariant(format!(
                                "latent bounds collapsed at observation {i}, column {d}: ({lower}, {upper})"
                            )));
                        }
                        y[(i, d)] = sample_truncated_normal(cond_mean[i], var, lower, upper, rng)?;
                    }
                }
            }
        }
    }
    Ok(())
}
