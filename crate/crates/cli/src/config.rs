//! Command-line flags layered over an optional flat JSON config file whose
//! keys are the flag names (`burn-in` or `burn_in`). Flags win.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::design::{parse_designs, Design};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "rankgm",
    version,
    about = "Rank-likelihood graphical model estimation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the graph and inverse correlation matrix of a CSV data set.
    Fit(Flags),
    /// Draw one data set from a simulation design.
    Simulate(Flags),
    /// Simulate, fit and score replications of one or more designs.
    Benchmark(Flags),
    /// Score an estimated edge matrix against a true one.
    Score(Flags),
}

/// Every flag is optional here so that the config file can supply it.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Flags {
    /// JSON file of default values for any of the other flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Data CSV (fit).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Kept draws per chain.
    #[arg(long)]
    pub draws: Option<usize>,
    /// Comma-separated sparsity constants, e.g. 0.1,1,10,100.
    #[arg(long)]
    #[serde(default, deserialize_with = "list_or_string")]
    pub c_grid: Option<String>,
    #[arg(long)]
    pub wishart_df: Option<f64>,
    /// Comma-separated designs kind:p:n, e.g. ar1:10:200,sparse0.1:25:50.
    #[arg(long)]
    #[serde(default, deserialize_with = "list_or_string")]
    pub design: Option<String>,
    #[arg(long)]
    pub replications: Option<usize>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Estimated edge matrix CSV (score).
    #[arg(long)]
    pub estimate: Option<PathBuf>,
    /// True edge matrix CSV (score).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Estimated matrix for the scaled L1 loss (score).
    #[arg(long)]
    pub estimate_matrix: Option<PathBuf>,
    /// True matrix for the scaled L1 loss (score).
    #[arg(long)]
    pub truth_matrix: Option<PathBuf>,
    /// Rescale every input column to [0, 1] before fitting. Has no effect on
    /// the estimate since only ranks enter the likelihood.
    #[arg(long)]
    #[serde(default)]
    pub minmax_scale: bool,
    /// Record wall-clock time in the manifest (makes it non-reproducible).
    #[arg(long)]
    #[serde(default)]
    pub timing: bool,
}

fn list_or_string<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    Ok(match Value::deserialize(d)? {
        Value::Null => None,
        Value::String(s) => Some(s),
        Value::Number(n) => Some(n.to_string()),
        Value::Array(items) => Some(
            items
                .iter()
                .map(|v| match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
        ),
        other => {
            return Err(serde::de::Error::custom(format!(
                "expected a list or string, got {other}"
            )))
        }
    })
}

impl Flags {
    /// Fills unset flags from the config file named by `--config`.
    pub fn resolve(self) -> CliResult<Flags> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = load_file(&path)?;
        Ok(Flags {
            config: self.config,
            input: self.input.or(file.input),
            out_dir: self.out_dir.or(file.out_dir),
            seed: self.seed.or(file.seed),
            burn_in: self.burn_in.or(file.burn_in),
            draws: self.draws.or(file.draws),
            c_grid: self.c_grid.or(file.c_grid),
            wishart_df: self.wishart_df.or(file.wishart_df),
            design: self.design.or(file.design),
            replications: self.replications.or(file.replications),
            threads: self.threads.or(file.threads),
            estimate: self.estimate.or(file.estimate),
            truth: self.truth.or(file.truth),
            estimate_matrix: self.estimate_matrix.or(file.estimate_matrix),
            truth_matrix: self.truth_matrix.or(file.truth_matrix),
            minmax_scale: self.minmax_scale || file.minmax_scale,
            timing: self.timing || file.timing,
        })
    }

    pub fn out_dir(&self) -> CliResult<&Path> {
        self.out_dir
            .as_deref()
            .ok_or_else(|| CliError::Config("--out-dir is required".into()))
    }

    pub fn required_path<'a>(&self, value: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
        value
            .as_deref()
            .ok_or_else(|| CliError::Config(format!("--{flag} is required")))
    }

    pub fn chain(&self) -> CliResult<ChainSettings> {
        let c_grid = match &self.c_grid {
            None => rankgm::pipeline::DEFAULT_C_GRID.to_vec(),
            Some(s) => s
                .split(',')
                .map(|c| {
                    c.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Config(format!("bad c grid entry {c:?}")))
                })
                .collect::<CliResult<Vec<_>>>()?,
        };
        if c_grid.is_empty() || c_grid.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(CliError::Config(
                "c grid must be a non-empty list of positive numbers".into(),
            ));
        }
        let settings = ChainSettings {
            c_grid,
            burn_in: self.burn_in.unwrap_or(5000),
            draws: self.draws.unwrap_or(10000),
            seed: self.seed.unwrap_or(0),
            wishart_df: self
                .wishart_df
                .unwrap_or(rankgm::edge_selection::DEFAULT_WISHART_DF),
        };
        if settings.draws == 0 {
            return Err(CliError::Config("--draws must be at least 1".into()));
        }
        if !(settings.wishart_df > 0.0 && settings.wishart_df.is_finite()) {
            return Err(CliError::Config("--wishart-df must be positive".into()));
        }
        Ok(settings)
    }

    pub fn designs(&self) -> CliResult<Vec<Design>> {
        let text = self
            .design
            .as_deref()
            .ok_or_else(|| CliError::Config("--design is required".into()))?;
        let designs = parse_designs(text).map_err(CliError::Config)?;
        if designs.is_empty() {
            return Err(CliError::Config("no designs given".into()));
        }
        Ok(designs)
    }
}

/// Resolved sampler settings, echoed into manifests.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSettings {
    pub c_grid: Vec<f64>,
    pub burn_in: usize,
    pub draws: usize,
    pub seed: u64,
    pub wishart_df: f64,
}

impl ChainSettings {
    pub fn fit_config(&self, seed: u64) -> rankgm::FitConfig {
        rankgm::FitConfig {
            c_grid: self.c_grid.clone(),
            burn_in: self.burn_in,
            draws: self.draws,
            seed,
            wishart_df: self.wishart_df,
        }
    }
}

fn load_file(path: &Path) -> CliResult<Flags> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(CliError::Config(format!(
            "{}: expected a JSON object",
            path.display()
        )));
    };
    if map.contains_key("config") {
        return Err(CliError::Config(format!(
            "{}: config files cannot include other config files",
            path.display()
        )));
    }
    let normalized: Map<String, Value> = map
        .into_iter()
        .map(|(k, v)| (k.replace('_', "-"), v))
        .collect();
    serde_json::from_value(Value::Object(normalized))
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
