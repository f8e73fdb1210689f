use std::fs;
use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use rankgm::rng::derive_seed;
use rankgm::simulation::{
    generate_precision, inverse_correlation, realized_fill, sample_observations, true_edges,
    ConfusionCounts, MetricsReport, PrecisionSpec,
};
use rankgm::{EdgeMatrix, FitResult};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ChainSettings, Flags};
use crate::csv_io::{
    format_real, read_edges, read_matrix, read_table, write_edges, write_json, write_lines,
    write_matrix,
};
use crate::design::Design;
use crate::error::{CliError, CliResult};

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_owned(),
        source,
    })
}

#[derive(Serialize)]
struct CandidateSummary {
    c: f64,
    edges: usize,
    bic: Option<f64>,
    bic_error: Option<String>,
    max_split_rhat: Option<f64>,
    ranks_satisfied: bool,
    psi_init_from_ranks: bool,
}

#[derive(Serialize)]
struct FitManifest<'a> {
    command: &'static str,
    version: &'static str,
    input: String,
    n: usize,
    p: usize,
    minmax_scale: bool,
    settings: &'a ChainSettings,
    selected_c: f64,
    candidates: Vec<CandidateSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_seconds: Option<f64>,
}

/// Maps every column affinely onto [0, 1]; constant columns map to 0.
fn minmax_scale(x: &mut DMatrix<f64>) {
    for mut col in x.column_iter_mut() {
        let (lo, hi) = (col.min(), col.max());
        let range = hi - lo;
        col.apply(|v| *v = if range > 0.0 { (*v - lo) / range } else { 0.0 });
    }
}

pub fn fit(flags: &Flags) -> CliResult<()> {
    let started = Instant::now();
    let input = flags.required_path(&flags.input, "input")?;
    let out_dir = flags.out_dir()?;
    let settings = flags.chain()?;

    let table = read_table(input)?;
    let mut x = table.data;
    let (n, p) = x.shape();
    if n < 2 || p < 2 {
        return Err(CliError::Input(format!(
            "{}: need at least 2 rows and 2 columns, found {n} x {p}",
            input.display()
        )));
    }
    if flags.minmax_scale {
        minmax_scale(&mut x);
    }
    let result = rankgm::fit(&x, &settings.fit_config(settings.seed))?;

    create_dir(out_dir)?;
    let header = table.header.as_deref();
    let best = result.best();
    write_edges(&out_dir.join("edges.csv"), &best.edges, header)?;
    write_matrix(&out_dir.join("psi.csv"), &best.psi_mean, header)?;
    write_matrix(&out_dir.join("inclusion.csv"), &best.inclusion, header)?;
    write_edge_list(&out_dir.join("edge_list.csv"), &result, header)?;
    write_bic_table(&out_dir.join("bic.csv"), &result)?;

    let manifest = FitManifest {
        command: "fit",
        version: env!("CARGO_PKG_VERSION"),
        input: input.display().to_string(),
        n,
        p,
        minmax_scale: flags.minmax_scale,
        settings: &settings,
        selected_c: best.c,
        candidates: result
            .candidates
            .iter()
            .map(|c| CandidateSummary {
                c: c.c,
                edges: c.edges.edge_count(),
                bic: c.bic.as_ref().map(|b| b.bic),
                bic_error: c.bic_error.clone(),
                max_split_rhat: c.diagnostics.max_split_rhat,
                ranks_satisfied: c.diagnostics.ranks_satisfied,
                psi_init_from_ranks: c.diagnostics.psi_init_from_ranks,
            })
            .collect(),
        wall_time_seconds: flags.timing.then(|| started.elapsed().as_secs_f64()),
    };
    write_json(&out_dir.join("manifest.json"), &manifest)
}

fn write_bic_table(path: &Path, result: &FitResult) -> CliResult<()> {
    let rows = result.candidates.iter().enumerate().map(|(i, c)| {
        let (k, bic) = match &c.bic {
            Some(b) => (b.k.to_string(), format_real(b.bic)),
            None => (String::new(), "inf".to_owned()),
        };
        format!(
            "{},{},{},{},{}",
            format_real(c.c),
            c.edges.edge_count(),
            k,
            bic,
            u8::from(i == result.selected)
        )
    });
    write_lines(
        path,
        std::iter::once("c,edges,k,bic,selected".to_owned()).chain(rows),
    )
}

/// Selected edges as `node_a,node_b,posterior_mean_psi,inclusion_probability`.
fn write_edge_list(path: &Path, result: &FitResult, header: Option<&[String]>) -> CliResult<()> {
    let best = result.best();
    let name = |i: usize| header.map_or_else(|| (i + 1).to_string(), |h| h[i].clone());
    let rows = best.edges.edges().map(|(i, j)| {
        format!(
            "{},{},{},{}",
            name(i),
            name(j),
            format_real(best.psi_mean[(i, j)]),
            format_real(best.inclusion[(i, j)])
        )
    });
    write_lines(
        path,
        std::iter::once("node_a,node_b,psi,inclusion".to_owned()).chain(rows),
    )
}

#[derive(Serialize)]
struct SimulateManifest {
    command: &'static str,
    version: &'static str,
    design: String,
    seed: u64,
    realized_fill: f64,
    true_edges: usize,
    transforms: Vec<&'static str>,
}

/// Seeds of the precision draw and of the observations for one replication.
fn replication_seeds(seed: u64) -> (u64, u64) {
    (derive_seed(seed, 1), derive_seed(seed, 2))
}

struct Simulated {
    omega: DMatrix<f64>,
    obs: rankgm::simulation::Observations,
}

fn simulate_design(design: &Design, seed: u64) -> CliResult<Simulated> {
    let (omega_seed, data_seed) = replication_seeds(seed);
    let omega = generate_precision(&PrecisionSpec {
        kind: design.kind,
        p: design.p,
        seed: omega_seed,
    })?;
    let obs = sample_observations(&omega, design.n, data_seed)?;
    Ok(Simulated { omega, obs })
}

pub fn simulate(flags: &Flags) -> CliResult<()> {
    let out_dir = flags.out_dir()?;
    let designs = flags.designs()?;
    let [design] = designs[..] else {
        return Err(CliError::Config("simulate takes exactly one design".into()));
    };
    let seed = flags.seed.unwrap_or(0);
    let sim = simulate_design(&design, seed)?;
    create_dir(out_dir)?;
    write_matrix(&out_dir.join("x.csv"), &sim.obs.x, None)?;
    write_matrix(&out_dir.join("y_true.csv"), &sim.obs.y_true, None)?;
    write_matrix(&out_dir.join("omega.csv"), &sim.omega, None)?;
    write_matrix(
        &out_dir.join("psi_true.csv"),
        &inverse_correlation(&sim.omega)?,
        None,
    )?;
    let edges = true_edges(&sim.omega);
    write_edges(&out_dir.join("edges_true.csv"), &edges, None)?;
    write_json(
        &out_dir.join("manifest.json"),
        &SimulateManifest {
            command: "simulate",
            version: env!("CARGO_PKG_VERSION"),
            design: design.to_string(),
            seed,
            realized_fill: realized_fill(&sim.omega),
            true_edges: edges.edge_count(),
            transforms: sim.obs.transforms.iter().map(|t| t.name()).collect(),
        },
    )
}

struct ReplicationRow {
    design: Design,
    replication: usize,
    seed: u64,
    selected_c: f64,
    fill: f64,
    metrics: MetricsReport,
}

/// One simulate-fit-score cycle.
fn run_replication(
    design: &Design,
    seed: u64,
    settings: &ChainSettings,
) -> CliResult<(f64, f64, MetricsReport)> {
    let sim = simulate_design(design, seed)?;
    let result = rankgm::fit(&sim.obs.x, &settings.fit_config(derive_seed(seed, 3)))?;
    let best = result.best();
    let psi_true = inverse_correlation(&sim.omega)?;
    let metrics = MetricsReport::compute(
        &best.edges,
        &true_edges(&sim.omega),
        &best.psi_mean,
        &psi_true,
    )?;
    Ok((best.c, realized_fill(&sim.omega), metrics))
}

const METRICS: [&str; 4] = ["sp", "se", "mcc", "scaled_l1"];

fn metric_values(m: &MetricsReport) -> [f64; 4] {
    [m.sp, m.se, m.mcc, m.scaled_l1]
}

pub fn benchmark(flags: &Flags) -> CliResult<()> {
    let started = Instant::now();
    let out_dir = flags.out_dir()?;
    let designs = flags.designs()?;
    let settings = flags.chain()?;
    let replications = flags.replications.unwrap_or(100);
    if replications == 0 {
        return Err(CliError::Config("--replications must be at least 1".into()));
    }

    let jobs: Vec<(usize, usize)> = (0..designs.len())
        .flat_map(|d| (0..replications).map(move |r| (d, r)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(d, r)| {
            let seed = derive_seed(derive_seed(settings.seed, d as u64), r as u64);
            let (selected_c, fill, metrics) = run_replication(&designs[d], seed, &settings)?;
            Ok(ReplicationRow {
                design: designs[d],
                replication: r,
                seed,
                selected_c,
                fill,
                metrics,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    create_dir(out_dir)?;
    let lines = rows.iter().map(|row| {
        let values = metric_values(&row.metrics).map(format_real).join(",");
        format!(
            "{},{},{},{},{},{}",
            row.design,
            row.replication,
            row.seed,
            format_real(row.selected_c),
            format_real(row.fill),
            values
        )
    });
    let head = format!(
        "design,replication,seed,selected_c,fill,{}",
        METRICS.join(",")
    );
    write_lines(
        &out_dir.join("replications.csv"),
        std::iter::once(head).chain(lines),
    )?;

    let mut summary = vec!["design,metric,mean,sd,median".to_owned()];
    for (d, design) in designs.iter().enumerate() {
        let chunk = &rows[d * replications..(d + 1) * replications];
        for (m, name) in METRICS.iter().enumerate() {
            let values: Vec<f64> = chunk.iter().map(|r| metric_values(&r.metrics)[m]).collect();
            let (mean, sd) = mean_sd(&values);
            summary.push(format!(
                "{design},{name},{},{},{}",
                format_real(mean),
                format_real(sd),
                format_real(median(&values))
            ));
        }
    }
    write_lines(&out_dir.join("summary.csv"), summary)?;

    #[derive(Serialize)]
    struct BenchmarkManifest<'a> {
        command: &'static str,
        version: &'static str,
        designs: Vec<String>,
        replications: usize,
        settings: &'a ChainSettings,
        #[serde(skip_serializing_if = "Option::is_none")]
        wall_time_seconds: Option<f64>,
    }
    write_json(
        &out_dir.join("manifest.json"),
        &BenchmarkManifest {
            command: "benchmark",
            version: env!("CARGO_PKG_VERSION"),
            designs: designs.iter().map(Design::to_string).collect(),
            replications,
            settings: &settings,
            wall_time_seconds: flags.timing.then(|| started.elapsed().as_secs_f64()),
        },
    )
}

/// Mean and sample standard deviation; the deviation of one value is 0.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

pub fn score(flags: &Flags) -> CliResult<()> {
    let out_dir = flags.out_dir()?;
    let estimate: EdgeMatrix = read_edges(flags.required_path(&flags.estimate, "estimate")?)?;
    let truth: EdgeMatrix = read_edges(flags.required_path(&flags.truth, "truth")?)?;
    if estimate.p() != truth.p() {
        return Err(CliError::Input(format!(
            "edge matrices have {} and {} nodes",
            estimate.p(),
            truth.p()
        )));
    }
    let counts = ConfusionCounts::between(&estimate, &truth)?;
    let l1 = match (&flags.estimate_matrix, &flags.truth_matrix) {
        (Some(e), Some(t)) => {
            let (e, t) = (read_matrix(e)?, read_matrix(t)?);
            if e.shape() != t.shape() || !t.is_square() {
                return Err(CliError::Input(format!(
                    "matrices have shapes {:?} and {:?}",
                    e.shape(),
                    t.shape()
                )));
            }
            format_real(rankgm::simulation::scaled_l1(&e, &t)?)
        }
        (None, None) => String::new(),
        _ => {
            return Err(CliError::Config(
                "--estimate-matrix and --truth-matrix go together".into(),
            ))
        }
    };
    create_dir(out_dir)?;
    write_lines(
        &out_dir.join("metrics.csv"),
        [
            "tp,tn,fp,fn,sp,se,mcc,scaled_l1".to_owned(),
            format!(
                "{},{},{},{},{},{},{},{l1}",
                counts.tp,
                counts.tn,
                counts.fp,
                counts.fn_,
                format_real(counts.specificity()),
                format_real(counts.sensitivity()),
                format_real(counts.mcc())
            ),
        ],
    )
}
