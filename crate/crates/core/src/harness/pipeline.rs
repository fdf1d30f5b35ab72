use serde::{Deserialize, Serialize};

use crate::fourier::{distribution_complexity, predicate_lowest_degree, Complexity, FourierReport};
use crate::instances::{overlap, GoldreichInstance, Literal, PlantedCspInstance, PlantingDistribution};
use crate::reduction::{csp_to_bipartite, goldreich_to_bipartite, partition_to_assignment, ReducedInstance, ReductionOptions};
use crate::solver::{majority_vote_r1, spi_solve, OpCounts, SolverConfig};

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineOptions {
    pub reduction: ReductionOptions,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PipelineStatus {
    Solved,
    /// Uniform planting or constant predicate.
    Unidentifiable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Majority,
    Spi,
    None,
}

/// Outcome of a full CSP solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CspSolveReport {
    pub status: PipelineStatus,
    pub route: Route,
    pub fourier: FourierReport,
    pub assignment: Vec<i8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlap: Option<f64>,
    pub constraints: usize,
    /// Edges of the reduced graph; zero on the majority route.
    pub edges: usize,
    pub inconsistent_pairs: usize,
    pub coin_flips: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ops: Option<OpCounts>,
    #[serde(skip_serializing_if = "Option::is_none", rename = "T")]
    pub t: Option<usize>,
}

impl CspSolveReport {
    fn unidentifiable(fourier: FourierReport, constraints: usize) -> Self {
        CspSolveReport {
            status: PipelineStatus::Unidentifiable,
            route: Route::None,
            fourier,
            assignment: Vec::new(),
            overlap: None,
            constraints,
            edges: 0,
            inconsistent_pairs: 0,
            coin_flips: 0,
            ops: None,
            t: None,
        }
    }
}

fn finish(
    fourier: FourierReport,
    reduced: ReducedInstance,
    sigma: Option<&[i8]>,
    constraints: usize,
    options: &PipelineOptions,
) -> Result<CspSolveReport, HarnessError> {
    let result = spi_solve(&reduced.graph, &options.solver, reduced.truth.as_ref())?;
    let (assignment, inconsistent) = partition_to_assignment(&result.signs, options.solver.seed)?;
    let overlap = sigma.map(|s| overlap(&assignment, s)).transpose()?;
    Ok(CspSolveReport {
        status: PipelineStatus::Solved,
        route: Route::Spi,
        fourier,
        assignment,
        overlap,
        constraints,
        edges: reduced.graph.edges.len(),
        inconsistent_pairs: inconsistent,
        coin_flips: inconsistent,
        ops: Some(result.ops),
        t: Some(result.t),
    })
}

fn majority(fourier: FourierReport, view: &PlantedCspInstance, options: &PipelineOptions) -> Result<CspSolveReport, HarnessError> {
    let vote = majority_vote_r1(view, &fourier.subset, options.solver.seed)?;
    let overlap = view.sigma.as_deref().map(|s| overlap(&vote.assignment, s)).transpose()?;
    Ok(CspSolveReport {
        status: PipelineStatus::Solved,
        route: Route::Majority,
        fourier,
        assignment: vote.assignment,
        overlap,
        constraints: view.clauses.len(),
        edges: 0,
        inconsistent_pairs: 0,
        coin_flips: vote.coin_flips.len(),
        ops: None,
        t: None,
    })
}

/// Fourier scan, then majority vote (`r = 1`) or reduction plus subsampled
/// power iteration (`r >= 2`). Overlap is reported against `sigma` when the
/// instance carries it.
pub fn solve_csp_end_to_end(
    instance: &PlantedCspInstance,
    q: &PlantingDistribution,
    options: &PipelineOptions,
) -> Result<CspSolveReport, HarnessError> {
    if q.k() != instance.k {
        return Err(HarnessError::Input(format!("distribution has k = {}, instance has k = {}", q.k(), instance.k)));
    }
    let fourier = distribution_complexity(q);
    match fourier.r {
        Complexity::Infinite | Complexity::Finite(0) => Ok(CspSolveReport::unidentifiable(fourier, instance.clauses.len())),
        Complexity::Finite(1) => majority(fourier, instance, options),
        Complexity::Finite(_) => {
            let reduced = csp_to_bipartite(instance, &fourier, &options.reduction)?;
            finish(fourier, reduced, instance.sigma.as_deref(), instance.clauses.len(), options)
        }
    }
}

/// Goldreich constraints at a single position viewed as a CSP whose literal
/// there carries the observed value as its sign.
fn fold_single_position(instance: &GoldreichInstance, pos: usize) -> PlantedCspInstance {
    let k = instance.k();
    let clauses = instance
        .constraints
        .iter()
        .map(|(vars, value)| {
            vars.iter()
                .enumerate()
                .map(|(i, &v)| Literal::new(v, if i == pos { *value } else { 1 }))
                .collect()
        })
        .collect();
    PlantedCspInstance { n: instance.n, k, sigma: instance.sigma.clone(), clauses }
}

/// Same pipeline for predicate constraints; the witness comes from the
/// predicate's lowest nonzero degree.
pub fn solve_goldreich_end_to_end(instance: &GoldreichInstance, options: &PipelineOptions) -> Result<CspSolveReport, HarnessError> {
    let fourier = predicate_lowest_degree(&instance.predicate)?;
    match fourier.r {
        Complexity::Infinite | Complexity::Finite(0) => Ok(CspSolveReport::unidentifiable(fourier, instance.constraints.len())),
        Complexity::Finite(1) => {
            let view = fold_single_position(instance, fourier.subset[0]);
            majority(fourier, &view, options)
        }
        Complexity::Finite(_) => {
            let reduced = goldreich_to_bipartite(instance, &fourier, &options.reduction)?;
            finish(fourier, reduced, instance.sigma.as_deref(), instance.constraints.len(), options)
        }
    }
}
