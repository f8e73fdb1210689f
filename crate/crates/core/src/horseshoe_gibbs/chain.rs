use nalgebra::DMatrix;
use rand::Rng;

use super::{assemble_precision, update_column, HorseshoeState};
use crate::edge_selection::{self, ThresholdDraws, DEFAULT_WISHART_DF};
use crate::error::{Error, Result};
use crate::linalg;
use crate::rank_latent::{self, RankConstraints};
use crate::rng::rng_from_seed;

/// Settings of one MCMC run.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    /// Sparsity constant c of the horseshoe prior.
    pub c: f64,
    pub burn_in: usize,
    /// Number of kept draws after burn-in.
    pub draws: usize,
    pub seed: u64,
    /// Degrees of freedom of the Wishart reference used for thresholding.
    pub wishart_df: f64,
    /// Keep every Ψ draw and every reference partial-correlation matrix.
    /// Costs O(draws · p²) memory; means and edge tallies are always kept.
    pub store_draws: bool,
    /// When false the latent update ignores the ranks (all bounds ±∞).
    /// Only useful for checking the sampler against known stationary laws.
    pub enforce_ranks: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            burn_in: 5000,
            draws: 10000,
            seed: 0,
            wishart_df: DEFAULT_WISHART_DF,
            store_draws: false,
            enforce_ranks: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChainDiagnostics {
    /// Largest split-chain potential scale reduction over the off-diagonal
    /// entries of Ψ; `None` with fewer than four kept draws.
    pub max_split_rhat: Option<f64>,
    /// Whether the final latent matrix satisfies the rank constraints.
    pub ranks_satisfied: bool,
    /// Whether the initial Ψ came from the rank correlation (false: identity).
    pub psi_init_from_ranks: bool,
}

/// Everything downstream steps need from one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub c: f64,
    /// Posterior mean of Ψ over kept draws.
    pub psi_mean: DMatrix<f64>,
    /// Mean latent matrix over kept draws.
    pub latent_mean: DMatrix<f64>,
    /// Per-draw thresholding indicators.
    pub indicators: ThresholdDraws,
    /// Kept Ψ draws (only with `store_draws`).
    pub psi_draws: Vec<DMatrix<f64>>,
    /// Kept Wishart-reference partial correlations (only with `store_draws`).
    pub reference_draws: Vec<DMatrix<f64>>,
    pub draws_kept: usize,
    pub diagnostics: ChainDiagnostics,
}

/// Ranks `x` and runs the sampler seeded from `config.seed`.
pub fn run_chain(x: &DMatrix<f64>, config: &ChainConfig) -> Result<ChainOutput> {
    let ranks = rank_latent::compute_ranks(x)?;
    run_chain_on_ranks(&ranks, config, &mut rng_from_seed(config.seed))
}

/// Runs burn-in plus kept sweeps of the three-block Gibbs sampler
/// (latents, Cholesky regressions, Ψ) on precomputed ranks.
pub fn run_chain_on_ranks<R: Rng + ?Sized>(
    ranks: &RankConstraints,
    config: &ChainConfig,
    rng: &mut R,
) -> Result<ChainOutput> {
    let (n, p) = (ranks.n(), ranks.p());
    let mut state = HorseshoeState::new(p, config.c)?;
    if !(config.wishart_df > 0.0) {
        return Err(Error::argument(format!(
            "Wishart degrees of freedom must be positive, got {}",
            config.wishart_df
        )));
    }

    let mut y = rank_latent::init_latents(ranks);
    // Rank correlations are singular when n <= p or a column is fully tied.
    let init = linalg::correlation(&y).and_then(|c| linalg::spd_inverse(&c, "initial correlation"));
    let psi_init_from_ranks = init.is_ok();
    let mut psi = init.unwrap_or_else(|_| DMatrix::identity(p, p));

    let mut psi_sum = DMatrix::zeros(p, p);
    let mut latent_sum = DMatrix::zeros(n, p);
    let mut indicators = ThresholdDraws::new(p);
    let mut psi_draws = Vec::new();
    let mut reference_draws = Vec::new();
    let mut rhat = SplitRhat::new(p, config.draws);

    for sweep in 0..config.burn_in + config.draws {
        let step = |e: Error| Error::Chain {
            sweep,
            source: Box::new(e),
        };
        if config.enforce_ranks {
            rank_latent::gibbs_update_latents(&mut y, &psi, ranks, rng).map_err(step)?;
        } else {
            rank_latent::gibbs_update_unconstrained(&mut y, &psi, rng).map_err(step)?;
        }
        let gram = y.tr_mul(&y);
        for d in 0..p {
            update_column(d, &mut state, &y, Some(&gram), rng).map_err(step)?;
        }
        psi = assemble_precision(&state).map_err(step)?.psi;

        if sweep >= config.burn_in {
            let lambda = edge_selection::wishart_mean_from_gram(&gram, n, config.wishart_df)
                .map_err(step)?;
            let phi = edge_selection::partial_correlations(&lambda).map_err(step)?;
            let rho = edge_selection::partial_correlations(&psi).map_err(step)?;
            indicators.push(&edge_selection::zero_one_threshold(&rho, &phi).map_err(step)?);
            psi_sum += &psi;
            latent_sum += &y;
            rhat.push(sweep - config.burn_in, &psi);
            if config.store_draws {
                psi_draws.push(psi.clone());
                reference_draws.push(phi);
            }
        }
    }

    let m = config.draws.max(1) as f64;
    Ok(ChainOutput {
        c: config.c,
        psi_mean: psi_sum / m,
        latent_mean: latent_sum / m,
        indicators,
        psi_draws,
        reference_draws,
        draws_kept: config.draws,
        diagnostics: ChainDiagnostics {
            max_split_rhat: rhat.max(),
            ranks_satisfied: !config.enforce_ranks || ranks.is_satisfied_by(&y),
            psi_init_from_ranks,
        },
    })
}

/// Online split-chain R̂: the kept draws are cut into two halves and each
/// entry's per-half mean and variance are accumulated with Welford updates.
struct SplitRhat {
    p: usize,
    half: usize,
    /// Draws ignored at the start so both halves have equal length.
    skip: usize,
    halves: [Vec<Welford>; 2],
}

#[derive(Clone, Copy, Default)]
struct Welford {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let delta = x - self.mean;
        self.mean += delta / self.n;
        self.m2 += delta * (x - self.mean);
    }

    fn variance(&self) -> f64 {
        self.m2 / (self.n - 1.0)
    }
}

impl SplitRhat {
    fn new(p: usize, draws: usize) -> Self {
        let entries = p * p.saturating_sub(1) / 2;
        let half = draws / 2;
        Self {
            p,
            half,
            skip: draws - 2 * half,
            halves: [
                vec![Welford::default(); entries],
                vec![Welford::default(); entries],
            ],
        }
    }

    fn push(&mut self, index: usize, psi: &DMatrix<f64>) {
        if index < self.skip {
            return;
        }
        let h = usize::from(index - self.skip >= self.half);
        let mut e = 0;
        for k in 0..self.p {
            for d in k + 1..self.p {
                self.halves[h][e].push(psi[(k, d)]);
                e += 1;
            }
        }
    }

    fn max(&self) -> Option<f64> {
        if self.half < 2 {
            return None;
        }
        let len = self.half as f64;
        self.halves[0]
            .iter()
            .zip(self.halves[1].iter())
            .filter_map(|(a, b)| {
                let w = 0.5 * (a.variance() + b.variance());
                if !(w > 0.0) {
                    return None;
                }
                let grand = 0.5 * (a.mean + b.mean);
                let between = len * ((a.mean - grand).powi(2) + (b.mean - grand).powi(2));
                let var_plus = (len - 1.0) / len * w + between / len;
                Some((var_plus / w).sqrt())
            })
            .reduce(f64::max)
    }
}
