//! Graph and inverse-correlation estimation for continuous data of arbitrary
//! marginals: a rank-likelihood Gibbs sampler with horseshoe shrinkage on the
//! Cholesky factor, per-draw edge thresholding and BIC tuning of the prior.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod edge_selection;
pub mod error;
pub mod graph;
pub mod horseshoe_gibbs;
pub mod linalg;
pub mod model_selection;
pub mod normal;
pub mod pipeline;
pub mod rank_latent;
pub mod rng;
pub mod simulation;

pub use error::{Error, Result};
pub use graph::EdgeMatrix;
pub use horseshoe_gibbs::{run_chain, ChainConfig, ChainOutput};
pub use pipeline::{fit, FitConfig, FitResult};
pub use rank_latent::{compute_ranks, RankConstraints};
