//! End-to-end estimate: one chain per c, median-probability graph per chain,
//! BIC over the grid.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::edge_selection::{median_probability_edges, DEFAULT_WISHART_DF};
use crate::error::{Error, Result};
use crate::graph::EdgeMatrix;
use crate::horseshoe_gibbs::{run_chain_on_ranks, ChainConfig, ChainDiagnostics};
use crate::model_selection::{select_c, BicResult};
use crate::rank_latent::{self, RankConstraints};
use crate::rng::{derive_seed, rng_from_seed};

pub const DEFAULT_C_GRID: [f64; 4] = [0.1, 1.0, 10.0, 100.0];

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub c_grid: Vec<f64>,
    pub burn_in: usize,
    pub draws: usize,
    pub seed: u64,
    pub wishart_df: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            c_grid: DEFAULT_C_GRID.to_vec(),
            burn_in: 5000,
            draws: 10000,
            seed: 0,
            wishart_df: DEFAULT_WISHART_DF,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.c_grid.is_empty() {
            return Err(Error::argument("c grid is empty"));
        }
        if let Some(c) = self.c_grid.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::argument(format!(
                "c grid entries must be positive, got {c}"
            )));
        }
        if self.draws == 0 {
            return Err(Error::argument("at least one kept draw is required"));
        }
        if !(self.wishart_df > 0.0 && self.wishart_df.is_finite()) {
            return Err(Error::argument(format!(
                "Wishart degrees of freedom must be positive, got {}",
                self.wishart_df
            )));
        }
        Ok(())
    }

    /// Seed of the chain for grid value `c`; depends on c only, not its position.
    pub fn chain_seed(&self, c: f64) -> u64 {
        derive_seed(self.seed, c.to_bits())
    }
}

/// Result for one grid value.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateFit {
    pub c: f64,
    pub edges: EdgeMatrix,
    pub psi_mean: DMatrix<f64>,
    pub inclusion: DMatrix<f64>,
    /// `None` when the constrained MLE failed; such candidates are never selected.
    pub bic: Option<BicResult>,
    pub bic_error: Option<String>,
    pub diagnostics: ChainDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub n: usize,
    pub p: usize,
    pub candidates: Vec<CandidateFit>,
    /// Index into `candidates` of the BIC-selected c.
    pub selected: usize,
}

impl FitResult {
    pub fn best(&self) -> &CandidateFit {
        &self.candidates[self.selected]
    }
}

/// Ranks `x` and runs the full pipeline.
pub fn fit(x: &DMatrix<f64>, config: &FitConfig) -> Result<FitResult> {
    let ranks = rank_latent::compute_ranks(x)?;
    fit_ranks(&ranks, config)
}

pub fn fit_ranks(ranks: &RankConstraints, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let (n, p) = (ranks.n(), ranks.p());
    if p < 2 {
        return Err(Error::Dimension(format!(
            "at least two variables are required, got {p}"
        )));
    }
    let candidates = config
        .c_grid
        .par_iter()
        .map(|&c| fit_candidate(ranks, config, c))
        .collect::<Result<Vec<_>>>()?;

    let scored: Vec<BicResult> = candidates.iter().filter_map(|c| c.bic.clone()).collect();
    let best = select_c(&scored).map_err(|_| {
        let reasons: Vec<String> = candidates
            .iter()
            .map(|c| {
                format!(
                    "c = {}: {}",
                    c.c,
                    c.bic_error.as_deref().unwrap_or("unknown")
                )
            })
            .collect();
        Error::Infeasible(format!("BIC failed for every c ({})", reasons.join("; ")))
    })?;
    let selected = candidates
        .iter()
        .position(|cand| {
            cand.bic
                .as_ref()
                .is_some_and(|b| b.c == best.c && b.bic == best.bic)
        })
        .expect("selected result comes from the candidates");
    Ok(FitResult {
        n,
        p,
        candidates,
        selected,
    })
}

fn fit_candidate(ranks: &RankConstraints, config: &FitConfig, c: f64) -> Result<CandidateFit> {
    let chain_config = ChainConfig {
        c,
        burn_in: config.burn_in,
        draws: config.draws,
        seed: config.chain_seed(c),
        wishart_df: config.wishart_df,
        store_draws: false,
        enforce_ranks: true,
    };
    let out = run_chain_on_ranks(ranks, &chain_config, &mut rng_from_seed(chain_config.seed))?;
    let edges = median_probability_edges(&out.indicators)?;
    let s = out.latent_mean.tr_mul(&out.latent_mean);
    let (bic, bic_error) = match BicResult::evaluate(c, &s, &edges, ranks.n()) {
        Ok(b) => (Some(b), None),
        Err(e @ (Error::Infeasible(_) | Error::NoConvergence { .. } | Error::Numeric(_))) => {
            (None, Some(e.to_string()))
        }
        Err(e) => return Err(e),
    };
    Ok(CandidateFit {
        c,
        edges,
        psi_mean: out.psi_mean,
        inclusion: out.indicators.inclusion_probabilities(),
        bic,
        bic_error,
        diagnostics: out.diagnostics,
    })
}
