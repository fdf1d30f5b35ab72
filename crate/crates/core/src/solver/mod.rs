//! Subsampled power iteration and the two comparison baselines.
//!
//! The edges are split into `T` sub-graphs with centered matrices
//! `M_t = A_t - (p/T) J`. Starting from a random `±1/√n1` vector the solver
//! alternates `y = normalize(Mᵀ_{2i-1} x)` and `x = normalize(M_{2i} y)` for
//! `i = 1..T/2`, rounds every iterate to signs and returns the per-coordinate
//! majority over a window of late iterates.

mod baseline;
mod matvec;
mod split;

pub use baseline::{majority_vote_r1, power_iteration_baseline, BaselineResult, MajorityResult};
pub use matvec::{apply_m, apply_mt, RightVector};
pub use split::{split_edges, RightSupport, SplitGraphs, SubGraph};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instances::{overlap, BipartiteGraph, HiddenPartition};
use crate::rng::{self, streams};

/// Iterates with a smaller norm abort the solve.
pub const MIN_NORM: f64 = 1e-12;

/// Largest right side the dense reference path will materialise.
pub const DENSE_MAX_N2: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("iterate {iteration} ({side} side) has zero norm; the graph is degenerate")]
    ZeroNorm { iteration: usize, side: &'static str },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("dense reference mode needs n2 <= {DENSE_MAX_N2}, got {0}")]
    DenseTooLarge(usize),
    #[error("truth labels do not match the graph: {0}")]
    Truth(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    #[default]
    ImplicitSparse,
    /// Materialises every `M_t`; reference for differential testing.
    DenseReference,
}

/// Solver parameters. `T = ceil(t_factor · ln n1)` rounded up to an even
/// number, unless `t_override` is set. The majority window covers iterates
/// `i` with `floor(start·T/2) < i <= ceil(end·T/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub t_factor: f64,
    pub t_override: Option<usize>,
    pub window: (f64, f64),
    pub seed: u64,
    pub p_override: Option<f64>,
    pub mode: SolveMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { t_factor: 10.0, t_override: None, window: (0.5, 1.0), seed: 0, p_override: None, mode: SolveMode::ImplicitSparse }
    }
}

impl SolverConfig {
    pub fn with_seed(seed: u64) -> Self {
        SolverConfig { seed, ..Default::default() }
    }

    /// Number of sub-matrices for a left side of size `n1`.
    pub fn rounds(&self, n1: usize) -> Result<usize, SolveError> {
        let t = match self.t_override {
            Some(t) => t,
            None => {
                if !(self.t_factor > 0.0) {
                    return Err(SolveError::Config(format!("t_factor must be positive, got {}", self.t_factor)));
                }
                (self.t_factor * (n1.max(2) as f64).ln()).ceil() as usize
            }
        };
        let t = t.max(2);
        Ok(t + t % 2)
    }

    /// Inclusive range of iterates `(first, last)` entering the vote.
    pub fn window_range(&self, half: usize) -> Result<(usize, usize), SolveError> {
        let (start, end) = self.window;
        if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&end) {
            return Err(SolveError::Config(format!("window fractions must lie in [0, 1], got {:?}", self.window)));
        }
        let first = (start * half as f64).floor() as usize + 1;
        let last = ((end * half as f64).ceil() as usize).min(half);
        if first > last {
            return Err(SolveError::Config(format!("majority window {:?} is empty for {half} iterations", self.window)));
        }
        Ok((first, last))
    }
}

/// Work counters. Each counts elementary reads or writes of one kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OpCounts {
    /// Edge visits across all products.
    pub edge_touches: u64,
    /// Reads or writes of support-sized vectors.
    pub support_touches: u64,
    /// Reads or writes of length-`n1` vectors.
    pub left_touches: u64,
}

impl OpCounts {
    pub fn total(&self) -> u64 {
        self.edge_touches + self.support_touches + self.left_touches
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    #[default]
    Ok,
    Degenerate,
}

/// Output of [`spi_solve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub signs: Vec<i8>,
    pub status: SolveStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlap: Option<f64>,
    #[serde(rename = "U_trace")]
    pub u_trace: Vec<f64>,
    #[serde(rename = "V_trace")]
    pub v_trace: Vec<f64>,
    pub iterations: usize,
    pub edges_used: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub window: (usize, usize),
    pub p: f64,
    pub ops: OpCounts,
    /// Longest dense `f64` buffer allocated during the solve.
    pub largest_dense_alloc: usize,
}

/// `sgn` with `sgn(0) = +1`.
pub fn sign(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

/// Random `±1/√n1` starting vector drawn from the solver seed.
pub fn initial_vector(n1: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, streams::INITIAL_VECTOR);
    let scale = 1.0 / (n1 as f64).sqrt();
    (0..n1).map(|_| if rng.random::<bool>() { scale } else { -scale }).collect()
}

fn check_truth(graph: &BipartiteGraph, truth: Option<&HiddenPartition>) -> Result<(), SolveError> {
    if let Some(t) = truth {
        if t.u.len() != graph.n1 || t.v.len() > graph.n2 {
            return Err(SolveError::Truth(format!("u has {} entries, v has {}; graph is {} x {}", t.u.len(), t.v.len(), graph.n1, graph.n2)));
        }
    }
    Ok(())
}

/// Subsampled power iteration from a random start.
pub fn spi_solve(graph: &BipartiteGraph, config: &SolverConfig, truth: Option<&HiddenPartition>) -> Result<RecoveryResult, SolveError> {
    spi_solve_from(graph, config, initial_vector(graph.n1, config.seed), truth)
}

/// Subsampled power iteration from a caller-supplied unit start vector.
pub fn spi_solve_from(
    graph: &BipartiteGraph,
    config: &SolverConfig,
    x0: Vec<f64>,
    truth: Option<&HiddenPartition>,
) -> Result<RecoveryResult, SolveError> {
    if graph.edges.is_empty() {
        return Err(SolveError::EmptyGraph);
    }
    if x0.len() != graph.n1 {
        return Err(SolveError::Config(format!("start vector has length {}, expected {}", x0.len(), graph.n1)));
    }
    check_truth(graph, truth)?;
    let t = config.rounds(graph.n1)?;
    let half = t / 2;
    let window = config.window_range(half)?;
    let p = config.p_override.unwrap_or_else(|| graph.density());
    let split = split_edges(graph, t, p, config.seed)?;
    let n1 = graph.n1;
    let n2 = graph.n2;
    let q = split.q;

    let mut x = x0;
    let mut votes = vec![0i32; n1];
    let mut u_trace = Vec::new();
    let mut v_trace = Vec::new();
    let mut ops = OpCounts::default();
    let mut largest = n1;

    let dense_mode = config.mode == SolveMode::DenseReference;
    if dense_mode {
        if n2 > DENSE_MAX_N2 {
            return Err(SolveError::DenseTooLarge(n2));
        }
        largest = largest.max(n1 * n2);
    }

    for i in 1..=half {
        let odd = &split.subs[2 * i - 2];
        let even = &split.subs[2 * i - 1];
        if dense_mode {
            let y = dense::mt_times(odd, &x, q);
            let ny = norm(&y);
            if ny < MIN_NORM {
                return Err(SolveError::ZeroNorm { iteration: i, side: "right" });
            }
            let y: Vec<f64> = y.iter().map(|v| v / ny).collect();
            if let Some(t) = truth {
                v_trace.push(dense::dot_labels(&t.v, &y));
            }
            x = dense::m_times(even, &y, q);
        } else {
            let mut y = apply_mt(odd, &x);
            ops.edge_touches += odd.edge_count() as u64;
            ops.support_touches += y.values.len() as u64;
            ops.left_touches += n1 as u64;
            let ny = y.norm_squared(q, n2).sqrt();
            ops.support_touches += y.values.len() as u64;
            if !(ny >= MIN_NORM) {
                return Err(SolveError::ZeroNorm { iteration: i, side: "right" });
            }
            y.scale(1.0 / ny);
            ops.support_touches += y.values.len() as u64;
            largest = largest.max(y.values.len());
            if let Some(t) = truth {
                v_trace.push(y.dot_labels(&t.v, q, n2));
            }
            x = apply_m(even, &y, q, n2);
            ops.edge_touches += even.edge_count() as u64;
            ops.support_touches += y.values.len() as u64;
            ops.left_touches += n1 as u64;
        }
        let nx = norm(&x);
        if !(nx >= MIN_NORM) {
            return Err(SolveError::ZeroNorm { iteration: i, side: "left" });
        }
        x.iter_mut().for_each(|v| *v /= nx);
        ops.left_touches += 2 * n1 as u64;
        if let Some(t) = truth {
            u_trace.push(x.iter().zip(&t.u).map(|(a, &b)| a * f64::from(b)).sum());
        }
        if (window.0..=window.1).contains(&i) {
            for (vote, &xi) in votes.iter_mut().zip(&x) {
                *vote += i32::from(sign(xi));
            }
            ops.left_touches += n1 as u64;
        }
    }

    let signs: Vec<i8> = votes.iter().map(|&v| sign(f64::from(v))).collect();
    let overlap = truth.map(|t| overlap(&signs, &t.u).expect("lengths checked"));
    Ok(RecoveryResult {
        signs,
        status: SolveStatus::Ok,
        overlap,
        u_trace,
        v_trace,
        iterations: half,
        edges_used: graph.edges.len(),
        t,
        window,
        p,
        ops,
        largest_dense_alloc: largest,
    })
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Dense products with a materialised `A - qJ`.
pub(crate) mod dense {
    use super::SubGraph;

    pub fn matrix(sub: &SubGraph, q: f64) -> Vec<Vec<f64>> {
        let mut m = vec![vec![-q; sub.n2()]; sub.n1()];
        for (i, j) in sub.edges() {
            m[i][j] += 1.0;
        }
        m
    }

    pub fn mt_times(sub: &SubGraph, x: &[f64], q: f64) -> Vec<f64> {
        let m = matrix(sub, q);
        let mut y = vec![0.0; sub.n2()];
        for (row, &xi) in m.iter().zip(x) {
            for (yj, &mij) in y.iter_mut().zip(row) {
                *yj += mij * xi;
            }
        }
        y
    }

    pub fn m_times(sub: &SubGraph, y: &[f64], q: f64) -> Vec<f64> {
        matrix(sub, q).iter().map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn dot_labels(v: &[i8], y: &[f64]) -> f64 {
        let labelled: f64 = v.iter().zip(y).map(|(&s, &yj)| f64::from(s) * yj).sum();
        if v.len() == y.len() {
            return labelled;
        }
        // the unlabelled tail balances the labelled sum and is constant there
        let tail = y[v.len()..].iter().sum::<f64>() / (y.len() - v.len()) as f64;
        labelled - tail * v.iter().map(|&s| f64::from(s)).sum::<f64>()
    }
}
