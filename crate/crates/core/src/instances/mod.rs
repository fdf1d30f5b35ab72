//! Instance types, seeded generators and the JSON-lines file formats.

mod csp;
mod goldreich;
pub mod io;
mod sbm;

pub use csp::{sample_planted_csp, PlantingDistribution};
pub use goldreich::{majority_predicate, parity_predicate, predicate_table, sample_goldreich};
pub use sbm::sample_bipartite_block;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("edge probability {name} = {value} is outside [0, 1]")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },
    #[error("delta must lie in [0, 2] and differ from 1, got {0}")]
    InvalidDelta(f64),
    #[error("{side} = {value} must be even when no partition is supplied")]
    OddSide { side: &'static str, value: usize },
    #[error("vertex set sizes must be at least 1")]
    EmptySide,
    #[error("partition lengths ({u}, {v}) do not match graph sides ({n1}, {n2})")]
    PartitionShape { u: usize, v: usize, n1: usize, n2: usize },
    #[error("need at least k = {k} variables, got n = {n}")]
    TooFewVariables { n: usize, k: usize },
    #[error("planting distribution has no positive weight")]
    ZeroDistribution,
    #[error("planting weights must be finite and nonnegative")]
    NegativeWeight,
    #[error("table length {0} is not a power of two >= 2")]
    TableLength(usize),
    #[error("predicate values must be +1 or -1")]
    PredicateValue,
    #[error("entry {index} is {value}, expected +1 or -1")]
    NotASign { index: usize, value: i8 },
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("edge ({i}, {j}) is out of range for a {n1} x {n2} graph")]
    EdgeOutOfRange { i: usize, j: usize, n1: usize, n2: usize },
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("clause {clause} is malformed: {reason}")]
    BadClause { clause: usize, reason: String },
}

/// Sparse bipartite graph between `V1 = 0..n1` and `V2 = 0..n2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteGraph {
    pub n1: usize,
    pub n2: usize,
    pub edges: Vec<(usize, usize)>,
}

impl BipartiteGraph {
    /// Builds a graph, rejecting out-of-range or repeated edges.
    pub fn new(n1: usize, n2: usize, edges: Vec<(usize, usize)>) -> Result<Self, InstanceError> {
        let graph = BipartiteGraph { n1, n2, edges };
        graph.validate()?;
        Ok(graph)
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.n1 == 0 || self.n2 == 0 {
            return Err(InstanceError::EmptySide);
        }
        let mut seen = std::collections::HashSet::with_capacity(self.edges.len());
        for &(i, j) in &self.edges {
            if i >= self.n1 || j >= self.n2 {
                return Err(InstanceError::EdgeOutOfRange { i, j, n1: self.n1, n2: self.n2 });
            }
            if !seen.insert((i, j)) {
                return Err(InstanceError::DuplicateEdge(i, j));
            }
        }
        Ok(())
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `m / (n1 n2)`, the unbiased estimate of the mean edge probability.
    pub fn density(&self) -> f64 {
        self.edges.len() as f64 / (self.n1 as f64 * self.n2 as f64)
    }
}

/// Ground-truth ±1 labels for both sides of a bipartite graph.
///
/// `u[i] = +1` marks `i ∈ A1`, `v[j] = +1` marks `j ∈ A2`. For graphs obtained
/// by reduction `v` may be shorter than `n2`: it then labels only the
/// materialised right vertices and the unlabelled remainder is treated as
/// balancing the total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HiddenPartition {
    pub u: Vec<i8>,
    pub v: Vec<i8>,
}

impl HiddenPartition {
    pub fn validate(&self) -> Result<(), InstanceError> {
        check_signs(&self.u)?;
        check_signs(&self.v)
    }
}

/// Parameters of the bipartite stochastic block model.
///
/// Same-side pairs (`A1–A2`, `B1–B2`) are joined with probability `delta * p`,
/// crossing pairs with probability `(2 - delta) * p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockModelParams {
    pub n1: usize,
    pub n2: usize,
    pub delta: f64,
    pub p: f64,
    pub seed: u64,
}

impl BlockModelParams {
    pub fn same_side_probability(&self) -> f64 {
        self.delta * self.p
    }

    pub fn crossing_probability(&self) -> f64 {
        (2.0 - self.delta) * self.p
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.n1 == 0 || self.n2 == 0 {
            return Err(InstanceError::EmptySide);
        }
        if !(0.0..=2.0).contains(&self.delta) || self.delta == 1.0 {
            return Err(InstanceError::InvalidDelta(self.delta));
        }
        for (name, value) in [
            ("delta * p", self.same_side_probability()),
            ("(2 - delta) * p", self.crossing_probability()),
        ] {
            if !(0.0..=1.0).contains(&value) || value.is_nan() {
                return Err(InstanceError::ProbabilityOutOfRange { name, value });
            }
        }
        Ok(())
    }
}

/// A literal: variable index plus polarity (`+1` positive, `-1` negated).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: usize,
    pub sign: i8,
}

impl Literal {
    pub fn new(var: usize, sign: i8) -> Self {
        Literal { var, sign }
    }

    /// Dense code `2 * var` for the positive literal, `2 * var + 1` for the
    /// negated one.
    pub fn code(&self) -> usize {
        2 * self.var + usize::from(self.sign < 0)
    }

    pub fn from_code(code: usize) -> Self {
        Literal { var: code / 2, sign: if code % 2 == 0 { 1 } else { -1 } }
    }

    /// The value the assignment gives this literal (`+1` = TRUE).
    pub fn value(&self, sigma: &[i8]) -> i8 {
        self.sign * sigma[self.var]
    }

    pub fn negated(self) -> Self {
        Literal { var: self.var, sign: -self.sign }
    }
}

/// A planted (or observed) k-CSP formula over `n` variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedCspInstance {
    pub n: usize,
    pub k: usize,
    pub sigma: Option<Vec<i8>>,
    pub clauses: Vec<Vec<Literal>>,
}

impl PlantedCspInstance {
    pub fn validate(&self) -> Result<(), InstanceError> {
        if let Some(sigma) = &self.sigma {
            if sigma.len() != self.n {
                return Err(InstanceError::LengthMismatch(sigma.len(), self.n));
            }
            check_signs(sigma)?;
        }
        for (c, clause) in self.clauses.iter().enumerate() {
            let vars: Vec<usize> = clause.iter().map(|l| l.var).collect();
            check_tuple(c, &vars, self.k, self.n)?;
            if clause.iter().any(|l| l.sign != 1 && l.sign != -1) {
                return Err(InstanceError::BadClause { clause: c, reason: "sign is not ±1".into() });
            }
        }
        Ok(())
    }

    /// The ±1 pattern `sigma(C)` of a clause, or `None` without a planted
    /// assignment.
    pub fn pattern(&self, clause: &[Literal]) -> Option<Vec<i8>> {
        let sigma = self.sigma.as_ref()?;
        Some(clause.iter().map(|l| l.value(sigma)).collect())
    }
}

/// Constraints `P(x_{i1}, ..., x_{ik}) = b` of a Goldreich-style generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldreichInstance {
    pub n: usize,
    pub predicate: Vec<i8>,
    pub sigma: Option<Vec<i8>>,
    pub constraints: Vec<(Vec<usize>, i8)>,
}

impl GoldreichInstance {
    pub fn k(&self) -> usize {
        self.predicate.len().trailing_zeros() as usize
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let k = table_width(self.predicate.len())?;
        check_signs(&self.predicate)?;
        for (c, (vars, value)) in self.constraints.iter().enumerate() {
            check_tuple(c, vars, k, self.n)?;
            if *value != 1 && *value != -1 {
                return Err(InstanceError::BadClause { clause: c, reason: "value is not ±1".into() });
            }
            if let Some(sigma) = &self.sigma {
                let expected = eval_table(&self.predicate, vars.iter().map(|&v| sigma[v]));
                if expected != *value {
                    return Err(InstanceError::BadClause {
                        clause: c,
                        reason: "observed value disagrees with planted assignment".into(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Sign-invariant agreement `|signs · truth| / len`.
pub fn overlap(signs: &[i8], truth: &[i8]) -> Result<f64, InstanceError> {
    if signs.len() != truth.len() {
        return Err(InstanceError::LengthMismatch(signs.len(), truth.len()));
    }
    if signs.is_empty() {
        return Ok(0.0);
    }
    let dot: i64 = signs.iter().zip(truth).map(|(&a, &b)| i64::from(a) * i64::from(b)).sum();
    Ok(dot.unsigned_abs() as f64 / signs.len() as f64)
}

/// Index of a ±1 pattern in a `2^k` table: bit `i` is set iff `z[i] = +1`.
pub fn pattern_index<I: IntoIterator<Item = i8>>(pattern: I) -> usize {
    pattern
        .into_iter()
        .enumerate()
        .fold(0, |acc, (i, z)| if z > 0 { acc | (1 << i) } else { acc })
}

/// Inverse of [`pattern_index`].
pub fn index_pattern(index: usize, k: usize) -> Vec<i8> {
    (0..k).map(|i| if index >> i & 1 == 1 { 1 } else { -1 }).collect()
}

pub(crate) fn eval_table<I: IntoIterator<Item = i8>>(table: &[i8], inputs: I) -> i8 {
    table[pattern_index(inputs)]
}

/// `k` such that `len = 2^k`, `k >= 1`.
pub(crate) fn table_width(len: usize) -> Result<usize, InstanceError> {
    if len < 2 || !len.is_power_of_two() {
        return Err(InstanceError::TableLength(len));
    }
    Ok(len.trailing_zeros() as usize)
}

pub(crate) fn check_signs(values: &[i8]) -> Result<(), InstanceError> {
    match values.iter().position(|&s| s != 1 && s != -1) {
        Some(index) => Err(InstanceError::NotASign { index, value: values[index] }),
        None => Ok(()),
    }
}

fn check_tuple(c: usize, vars: &[usize], k: usize, n: usize) -> Result<(), InstanceError> {
    if vars.len() != k {
        return Err(InstanceError::BadClause {
            clause: c,
            reason: format!("width {} differs from k = {k}", vars.len()),
        });
    }
    for (a, &v) in vars.iter().enumerate() {
        if v >= n {
            return Err(InstanceError::BadClause { clause: c, reason: format!("variable {v} >= n = {n}") });
        }
        if vars[..a].contains(&v) {
            return Err(InstanceError::BadClause { clause: c, reason: format!("variable {v} repeated") });
        }
    }
    Ok(())
}

/// Draws an ordered tuple of `k` distinct variables uniformly from `0..n`.
pub(crate) fn distinct_tuple<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut vars = Vec::with_capacity(k);
    while vars.len() < k {
        let v = rng.random_range(0..n);
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    vars
}

pub(crate) fn random_signs<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<i8> {
    (0..n).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect()
}
