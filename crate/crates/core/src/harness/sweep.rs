//! Recovery-rate sweeps over a grid of density multipliers.
//!
//! For each multiplier `C` the sweep draws `trials` independent instances at
//! `C` times the family's base density and records exact-recovery rate, mean
//! overlap, wall-clock time and edge count. The base density is
//! `ln(n1) / ((δ-1)² √(n1·n2))` for the bipartite graph being solved; for CSP
//! families `n1 = 2n`, `n2` is the number of `(r-1)`-sets of literals and the
//! constraint count is chosen so the reduced graph has that density. When the
//! lowest correlated degree is one the base count is `n ln n / (δ-1)²`
//! constraints.

use std::io::Write;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fourier::{distribution_complexity, predicate_lowest_degree, Complexity, FourierReport};
use crate::instances::{overlap, sample_bipartite_block, sample_goldreich, sample_planted_csp, BlockModelParams, PlantingDistribution};
use crate::reduction::{binomial, ReductionOptions};
use crate::rng::derive_seed;
use crate::solver::{spi_solve, SolveError, SolverConfig};

use super::pipeline::{solve_csp_end_to_end, solve_goldreich_end_to_end, CspSolveReport, PipelineOptions, PipelineStatus};
use super::HarnessError;

pub const CSV_HEADER: &str = "multiplier,trials,exact_rate,mean_overlap,mean_runtime_ms,mean_edges";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Family {
    Sbm { n1: usize, n2: usize, delta: f64 },
    Csp { n: usize, weights: Vec<f64> },
    Goldreich { n: usize, predicate: Vec<i8> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub family: Family,
    pub multipliers: Vec<f64>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Thread count; all available cores when absent.
    #[serde(default)]
    pub workers: Option<usize>,
    /// When false the runtime column is left empty so output is reproducible
    /// byte for byte.
    #[serde(default = "yes")]
    pub wall_clock: bool,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub reduction: ReductionOptions,
    /// CSV destination written by [`run_sweep`], if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub multiplier: f64,
    pub trials: usize,
    pub exact_rate: f64,
    pub mean_overlap: f64,
    pub mean_runtime_ms: Option<f64>,
    pub mean_edges: f64,
}

/// Parses a spec as TOML, falling back to JSON.
pub fn parse_sweep_spec(text: &str) -> Result<SweepSpec, HarnessError> {
    match toml::from_str(text) {
        Ok(spec) => Ok(spec),
        Err(toml_err) => serde_json::from_str(text)
            .map_err(|json_err| HarnessError::Input(format!("sweep spec is neither TOML ({toml_err}) nor JSON ({json_err})"))),
    }
}

pub fn load_sweep_spec(path: &Path) -> Result<SweepSpec, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Path { path: path.to_path_buf(), source })?;
    parse_sweep_spec(&text)
}

struct Trial {
    overlap: f64,
    millis: f64,
    edges: usize,
}

enum Plan {
    Sbm { n1: usize, n2: usize, delta: f64, base_p: f64 },
    Csp { q: PlantingDistribution, n: usize, base_m: f64 },
    Goldreich { predicate: Vec<i8>, n: usize, base_m: f64 },
}

fn base_density(n1: usize, n2: f64, delta: f64) -> f64 {
    (n1 as f64).ln() / ((delta - 1.0).powi(2) * (n1 as f64 * n2).sqrt())
}

fn base_constraints(report: &FourierReport, n: usize) -> Result<f64, HarnessError> {
    match report.r {
        Complexity::Finite(1) => Ok(n as f64 * (n as f64).ln() / (report.delta - 1.0).powi(2)),
        Complexity::Finite(r) if r >= 2 => {
            let n1 = 2 * n;
            let n2 = binomial(2 * n, r - 1).ok_or_else(|| HarnessError::Input("right side too large".into()))? as f64;
            Ok(base_density(n1, n2, report.delta) * n1 as f64 * n2)
        }
        _ => Err(HarnessError::Input("planting is unidentifiable; nothing to sweep".into())),
    }
}

impl Plan {
    fn new(family: &Family) -> Result<Self, HarnessError> {
        Ok(match family {
            Family::Sbm { n1, n2, delta } => {
                if *delta == 1.0 {
                    return Err(HarnessError::Input("delta = 1 carries no signal".into()));
                }
                Plan::Sbm { n1: *n1, n2: *n2, delta: *delta, base_p: base_density(*n1, *n2 as f64, *delta) }
            }
            Family::Csp { n, weights } => {
                let q = PlantingDistribution::new(weights.clone())?;
                let base_m = base_constraints(&distribution_complexity(&q), *n)?;
                Plan::Csp { q, n: *n, base_m }
            }
            Family::Goldreich { n, predicate } => {
                let base_m = base_constraints(&predicate_lowest_degree(predicate)?, *n)?;
                Plan::Goldreich { predicate: predicate.clone(), n: *n, base_m }
            }
        })
    }

    fn run(&self, multiplier: f64, seed: u64, spec: &SweepSpec) -> Result<Trial, HarnessError> {
        let solver = SolverConfig { seed, ..spec.solver.clone() };
        let options = PipelineOptions { reduction: ReductionOptions { seed, ..spec.reduction }, solver: solver.clone() };
        match self {
            Plan::Sbm { n1, n2, delta, base_p } => {
                let params = BlockModelParams { n1: *n1, n2: *n2, delta: *delta, p: multiplier * base_p, seed };
                let (graph, truth) = sample_bipartite_block(&params, None)?;
                let start = Instant::now();
                let outcome = spi_solve(&graph, &solver, Some(&truth));
                let millis = start.elapsed().as_secs_f64() * 1e3;
                let overlap = match outcome {
                    Ok(result) => overlap(&result.signs, &truth.u)?,
                    Err(SolveError::EmptyGraph | SolveError::ZeroNorm { .. }) => 0.0,
                    Err(e) => return Err(e.into()),
                };
                Ok(Trial { overlap, millis, edges: graph.edges.len() })
            }
            Plan::Csp { q, n, base_m } => {
                let m = (multiplier * base_m).round() as usize;
                let instance = sample_planted_csp(q, *n, m, seed)?;
                let start = Instant::now();
                let outcome = solve_csp_end_to_end(&instance, q, &options);
                trial_from(outcome, start)
            }
            Plan::Goldreich { predicate, n, base_m } => {
                let m = (multiplier * base_m).round() as usize;
                let instance = sample_goldreich(predicate, *n, m, seed)?;
                let start = Instant::now();
                let outcome = solve_goldreich_end_to_end(&instance, &options);
                trial_from(outcome, start)
            }
        }
    }
}

fn trial_from(outcome: Result<CspSolveReport, HarnessError>, start: Instant) -> Result<Trial, HarnessError> {
    let millis = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok(report) if report.status == PipelineStatus::Solved => Ok(Trial {
            overlap: report.overlap.unwrap_or(0.0),
            millis,
            edges: if report.edges > 0 { report.edges } else { report.constraints },
        }),
        Ok(_) => Err(HarnessError::Input("planting is unidentifiable; nothing to sweep".into())),
        Err(HarnessError::Solve(SolveError::EmptyGraph | SolveError::ZeroNorm { .. })) => Ok(Trial { overlap: 0.0, millis, edges: 0 }),
        Err(e) => Err(e),
    }
}

/// Runs every `(multiplier, trial)` pair, in parallel, and aggregates rows in
/// multiplier order. Trial seeds depend only on the spec, never on
/// scheduling. Rows are also written to `spec.output` when set.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, HarnessError> {
    if spec.trials == 0 || spec.multipliers.is_empty() {
        return Err(HarnessError::Input("sweep needs at least one multiplier and one trial".into()));
    }
    if let Some(&bad) = spec.multipliers.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
        return Err(HarnessError::Input(format!("multipliers must be positive, got {bad}")));
    }
    let plan = Plan::new(&spec.family)?;
    let jobs: Vec<(usize, usize)> =
        (0..spec.multipliers.len()).flat_map(|a| (0..spec.trials).map(move |b| (a, b))).collect();
    let run = || {
        jobs.par_iter()
            .map(|&(a, b)| plan.run(spec.multipliers[a], derive_seed(spec.seed, a as u64, b as u64), spec))
            .collect::<Result<Vec<_>, _>>()
    };
    let trials = match spec.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| HarnessError::Input(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let rows: Vec<SweepRow> = trials
        .chunks(spec.trials)
        .zip(&spec.multipliers)
        .map(|(chunk, &multiplier)| {
            let n = chunk.len() as f64;
            SweepRow {
                multiplier,
                trials: chunk.len(),
                exact_rate: chunk.iter().filter(|t| t.overlap == 1.0).count() as f64 / n,
                mean_overlap: chunk.iter().map(|t| t.overlap).sum::<f64>() / n,
                mean_runtime_ms: spec.wall_clock.then(|| chunk.iter().map(|t| t.millis).sum::<f64>() / n),
                mean_edges: chunk.iter().map(|t| t.edges as f64).sum::<f64>() / n,
            }
        })
        .collect();
    if let Some(path) = &spec.output {
        let file = File::create(path).map_err(|source| HarnessError::Path { path: path.clone(), source })?;
        write_sweep_csv(file, &rows)?;
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(w: W, rows: &[SweepRow]) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}
