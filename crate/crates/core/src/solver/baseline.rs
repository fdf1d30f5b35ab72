//! Comparison baselines: majority vote for complexity-one plantings and plain
//! power iteration on the full centered matrix.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matvec::{apply_m, apply_mt};
use super::split::SubGraph;
use super::{initial_vector, norm, sign, SolveError, MIN_NORM};
use crate::instances::{BipartiteGraph, PlantedCspInstance};
use crate::rng::{self, streams};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajorityResult {
    pub assignment: Vec<i8>,
    /// Variables whose signed count was zero and got a coin flip.
    pub coin_flips: Vec<usize>,
}

/// Sets each variable to the sign of its signed occurrence count at the
/// single witness position; zero counts are broken by a seeded coin.
pub fn majority_vote_r1(instance: &PlantedCspInstance, subset: &[usize], seed: u64) -> Result<MajorityResult, SolveError> {
    let &[pos] = subset else {
        return Err(SolveError::Config(format!("majority vote needs a single position, got {subset:?}")));
    };
    if pos >= instance.k {
        return Err(SolveError::Config(format!("position {pos} out of range for k = {}", instance.k)));
    }
    let mut counts = vec![0i64; instance.n];
    for clause in &instance.clauses {
        let lit = clause[pos];
        counts[lit.var] += i64::from(lit.sign);
    }
    let mut coin = rng::stream(seed, streams::TIE_BREAK);
    let mut coin_flips = Vec::new();
    let assignment = counts
        .iter()
        .enumerate()
        .map(|(v, &c)| match c.signum() {
            1 => 1,
            -1 => -1,
            _ => {
                coin_flips.push(v);
                if coin.random::<bool>() {
                    1
                } else {
                    -1
                }
            }
        })
        .collect();
    Ok(MajorityResult { assignment, coin_flips })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub signs: Vec<i8>,
    pub iterations: usize,
    pub edge_touches: u64,
}

/// Power iteration `x <- normalize(M Mᵀ x)` on the whole graph with
/// `M = A - pJ`, no subsampling, signs of the final iterate.
pub fn power_iteration_baseline(
    graph: &BipartiteGraph,
    iterations: usize,
    seed: u64,
    p_override: Option<f64>,
) -> Result<BaselineResult, SolveError> {
    if iterations == 0 {
        return Err(SolveError::Config("iterations must be at least 1".into()));
    }
    if graph.edges.is_empty() {
        return Err(SolveError::EmptyGraph);
    }
    let q = p_override.unwrap_or_else(|| graph.density());
    let full = SubGraph::from_edges(graph.n1, graph.n2, &graph.edges);
    let mut x = initial_vector(graph.n1, seed);
    let mut edge_touches = 0u64;
    for iteration in 1..=iterations {
        let y = apply_mt(&full, &x);
        x = apply_m(&full, &y, q, graph.n2);
        edge_touches += 2 * full.edge_count() as u64;
        let nx = norm(&x);
        if !(nx >= MIN_NORM) {
            return Err(SolveError::ZeroNorm { iteration, side: "left" });
        }
        x.iter_mut().for_each(|v| *v /= nx);
    }
    Ok(BaselineResult { signs: x.iter().map(|&v| sign(v)).collect(), iterations, edge_touches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{overlap, sample_bipartite_block, BlockModelParams, Literal};

    #[test]
    fn positive_restricted_literal_wins() {
        let clauses = (0..5).map(|i| vec![Literal::new(1, 1), Literal::new(2 + i % 2, -1)]).collect();
        let inst = PlantedCspInstance { n: 4, k: 2, sigma: None, clauses };
        let r = majority_vote_r1(&inst, &[0], 0).unwrap();
        assert_eq!(r.assignment[1], 1);
        // variables 0, 2, 3 never occur at position 0
        assert_eq!(r.coin_flips, vec![0, 2, 3]);
        assert!(majority_vote_r1(&inst, &[0, 1], 0).is_err());
        assert!(majority_vote_r1(&inst, &[2], 0).is_err());
    }

    #[test]
    fn baseline_recovers_dense_square_instance() {
        let (g, truth) = sample_bipartite_block(&BlockModelParams { n1: 200, n2: 200, delta: 2.0, p: 0.3, seed: 1 }, None).unwrap();
        let r = power_iteration_baseline(&g, 30, 2, None).unwrap();
        assert_eq!(overlap(&r.signs, &truth.u).unwrap(), 1.0);
        assert!(power_iteration_baseline(&g, 0, 2, None).is_err());
    }
}
