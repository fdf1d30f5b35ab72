//! Planted CSP → bipartite block model.
//!
//! Clauses are restricted to the witness positions `S` of the Fourier scan.
//! The first restricted literal becomes a left vertex (one per literal, `2n`
//! in total) and the remaining `r - 1` literals, as an unordered set, become a
//! right vertex. Right vertices are indexed lazily in order of first
//! appearance; the nominal right side size `C(2n, r-1)` is carried separately.
//!
//! Ground-truth labels, when the planted assignment is known:
//!
//! * left literal `l`: `u = +1` iff `l` is FALSE under `sigma`, so
//!   `u[2v] = -sigma[v]` and `u[2v+1] = sigma[v]`;
//! * right tuple `t`: `v = -prod_{l in t} sigma(l)`.
//!
//! With these labels an edge joins equal labels exactly when the restricted
//! clause has `chi_S = +1`, which happens with probability `delta / 2`. For
//! even `r` the right label is `+1` iff `t` has an even number of TRUE
//! literals; for odd `r` the two classes swap.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fourier::{Complexity, FourierReport};
use crate::instances::io::ReductionSidecar;
use crate::instances::{BipartiteGraph, GoldreichInstance, HiddenPartition, Literal, PlantedCspInstance};
use crate::rng::{self, streams};

#[derive(Debug, Error, PartialEq)]
pub enum ReductionError {
    #[error("distribution complexity r = 1 is solved by the majority vote, not by reduction")]
    ComplexityOne,
    #[error("planting distribution is uniform; the assignment is unidentifiable")]
    Unidentifiable,
    #[error("predicate is constant and carries no information")]
    ConstantPredicate,
    #[error("instance has no constraints")]
    Empty,
    #[error("no constraints left after thinning")]
    NothingKept,
    #[error("witness subset {subset:?} does not fit clauses of width {k}")]
    SubsetMismatch { subset: Vec<usize>, k: usize },
    #[error("epsilon must lie in [0, 1), got {0}")]
    Epsilon(f64),
    #[error("nominal right side C({0}, {1}) overflows")]
    Overflow(usize, usize),
    #[error("literal labels must come in pairs, got {0} entries")]
    OddLength(usize),
}

/// How repeated constraints are turned into a simple graph.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Thinning {
    /// Keep every constraint, drop repeated edges.
    #[default]
    Dedup,
    /// Keep the first `Z ~ Poisson((1 - epsilon) m)` constraints, then dedup.
    Poisson { epsilon: f64 },
}

/// Which restricted literal goes to the left side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeftLiteral {
    #[default]
    First,
    /// Uniform position per constraint; only sensible for symmetric `Q`.
    RandomPosition,
}

/// Handling of Goldreich constraints with observed value `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignHandling {
    /// Negate the first restricted literal.
    #[default]
    Fold,
    /// Keep only constraints with value `+1`.
    Discard,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReductionOptions {
    pub thinning: Thinning,
    pub left: LeftLiteral,
    pub signs: SignHandling,
    pub seed: u64,
}

/// Dense indices for canonical `(r-1)`-sets of literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleIndexer {
    width: usize,
    index: HashMap<Box<[usize]>, usize>,
    tuples: Vec<Box<[usize]>>,
    n2_nominal: usize,
}

impl TupleIndexer {
    pub fn new(n: usize, width: usize) -> Result<Self, ReductionError> {
        let n2_nominal = binomial(2 * n, width).ok_or(ReductionError::Overflow(2 * n, width))?;
        Ok(TupleIndexer { width, index: HashMap::new(), tuples: Vec::new(), n2_nominal })
    }

    /// Index of the set of literals, assigning the next free index if new.
    pub fn intern(&mut self, literals: &[Literal]) -> usize {
        debug_assert_eq!(literals.len(), self.width);
        let mut codes: Vec<usize> = literals.iter().map(Literal::code).collect();
        codes.sort_unstable();
        let key = codes.into_boxed_slice();
        if let Some(&idx) = self.index.get(&key) {
            return idx;
        }
        let idx = self.tuples.len();
        self.tuples.push(key.clone());
        self.index.insert(key, idx);
        idx
    }

    pub fn get(&self, literals: &[Literal]) -> Option<usize> {
        let mut codes: Vec<usize> = literals.iter().map(Literal::code).collect();
        codes.sort_unstable();
        self.index.get(codes.as_slice()).copied()
    }

    /// Sorted literal codes of a materialised tuple.
    pub fn tuple(&self, idx: usize) -> &[usize] {
        &self.tuples[idx]
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn n2_nominal(&self) -> usize {
        self.n2_nominal
    }
}

/// Block model graph obtained from a CSP, with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedInstance {
    /// `n1 = 2n` literal vertices, `n2 = C(2n, r-1)` nominal tuple vertices.
    pub graph: BipartiteGraph,
    pub indexer: TupleIndexer,
    pub delta: f64,
    /// Constraints kept after thinning divided by `n1 * n2`.
    pub p_equiv: f64,
    pub constraints_kept: usize,
    /// `v` covers the materialised tuples only.
    pub truth: Option<HiddenPartition>,
}

impl ReducedInstance {
    pub fn sidecar(&self) -> ReductionSidecar {
        ReductionSidecar {
            delta: self.delta,
            p_equiv: self.p_equiv,
            n2_nominal: self.indexer.n2_nominal(),
            indexer_size: self.indexer.len(),
        }
    }
}

/// Literals of `clause` at the positions in `subset`, order preserved.
pub fn restrict_clause(clause: &[Literal], subset: &[usize]) -> Vec<Literal> {
    subset.iter().map(|&i| clause[i]).collect()
}

/// `C(n, k)`, `None` on overflow.
pub fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

fn witness(report: &FourierReport, k: usize) -> Result<usize, ReductionError> {
    match report.r {
        Complexity::Infinite => Err(ReductionError::Unidentifiable),
        Complexity::Finite(0) => Err(ReductionError::ConstantPredicate),
        Complexity::Finite(1) => Err(ReductionError::ComplexityOne),
        Complexity::Finite(r) => {
            if report.subset.len() != r || report.subset.iter().any(|&i| i >= k) {
                return Err(ReductionError::SubsetMismatch { subset: report.subset.clone(), k });
            }
            Ok(r)
        }
    }
}

/// Number of constraints to keep under the thinning mode.
fn kept_prefix(m: usize, thinning: Thinning, seed: u64) -> Result<usize, ReductionError> {
    match thinning {
        Thinning::Dedup => Ok(m),
        Thinning::Poisson { epsilon } => {
            if !(0.0..1.0).contains(&epsilon) {
                return Err(ReductionError::Epsilon(epsilon));
            }
            let mean = (1.0 - epsilon) * m as f64;
            if mean <= 0.0 {
                return Ok(0);
            }
            let z: f64 = Poisson::new(mean).expect("positive mean").sample(&mut rng::stream(seed, streams::THINNING));
            Ok((z as usize).min(m))
        }
    }
}

/// Builds the graph from already-restricted `r`-tuples of literals.
fn build(
    n: usize,
    restricted: impl Iterator<Item = Vec<Literal>>,
    sigma: Option<&[i8]>,
    delta: f64,
    r: usize,
    options: &ReductionOptions,
) -> Result<ReducedInstance, ReductionError> {
    let mut indexer = TupleIndexer::new(n, r - 1)?;
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    let mut kept = 0usize;
    let mut pos_rng = rng::stream(options.seed, streams::LEFT_POSITION);
    for mut lits in restricted {
        kept += 1;
        if options.left == LeftLiteral::RandomPosition {
            let pos = pos_rng.random_range(0..lits.len());
            lits.swap(0, pos);
        }
        let left = lits[0].code();
        let right = indexer.intern(&lits[1..]);
        if seen.insert((left, right)) {
            edges.push((left, right));
        }
    }
    if kept == 0 {
        return Err(ReductionError::NothingKept);
    }
    let n1 = 2 * n;
    let n2 = indexer.n2_nominal();
    let truth = sigma.map(|sigma| HiddenPartition {
        u: (0..n1).map(|code| -Literal::from_code(code).value(sigma)).collect(),
        v: (0..indexer.len())
            .map(|t| -indexer.tuple(t).iter().map(|&c| Literal::from_code(c).value(sigma)).product::<i8>())
            .collect(),
    });
    Ok(ReducedInstance {
        graph: BipartiteGraph { n1, n2, edges },
        p_equiv: kept as f64 / (n1 as f64 * n2 as f64),
        constraints_kept: kept,
        indexer,
        delta,
        truth,
    })
}

/// Reduces a planted CSP with complexity `r >= 2` to a block model graph.
pub fn csp_to_bipartite(
    instance: &PlantedCspInstance,
    report: &FourierReport,
    options: &ReductionOptions,
) -> Result<ReducedInstance, ReductionError> {
    let r = witness(report, instance.k)?;
    if instance.clauses.is_empty() {
        return Err(ReductionError::Empty);
    }
    let keep = kept_prefix(instance.clauses.len(), options.thinning, options.seed)?;
    let restricted = instance.clauses[..keep].iter().map(|c| restrict_clause(c, &report.subset));
    build(instance.n, restricted, instance.sigma.as_deref(), report.delta, r, options)
}

/// Reduces Goldreich constraints using the predicate's lowest-degree witness.
///
/// Every variable enters as a positive literal; in [`SignHandling::Fold`]
/// mode an observed value of `-1` negates the first restricted literal, so
/// the literal product equals `b * chi_S(sigma)`, which is `+1` with
/// probability `(1 + P̂(S)) / 2`.
pub fn goldreich_to_bipartite(
    instance: &GoldreichInstance,
    report: &FourierReport,
    options: &ReductionOptions,
) -> Result<ReducedInstance, ReductionError> {
    let r = witness(report, instance.k())?;
    if instance.constraints.is_empty() {
        return Err(ReductionError::Empty);
    }
    let delta = match options.signs {
        SignHandling::Fold => report.delta,
        SignHandling::Discard => {
            // E[chi_S | P = +1] = P̂(S) / (1 + P̂(∅))
            let mean = instance.predicate.iter().map(|&b| f64::from(b)).sum::<f64>() / instance.predicate.len() as f64;
            1.0 + report.coefficient / (1.0 + mean)
        }
    };
    let keep = kept_prefix(instance.constraints.len(), options.thinning, options.seed)?;
    let signs = options.signs;
    let restricted = instance.constraints[..keep].iter().filter_map(move |(vars, value)| {
        if signs == SignHandling::Discard && *value < 0 {
            return None;
        }
        let mut lits: Vec<Literal> = report.subset.iter().map(|&i| Literal::new(vars[i], 1)).collect();
        if *value < 0 {
            lits[0] = lits[0].negated();
        }
        Some(lits)
    });
    build(instance.n, restricted, instance.sigma.as_deref(), delta, r, options)
}

/// Reads a variable assignment off ±1 labels of the `2n` literal vertices.
///
/// Returns the assignment and the number of variables whose two literal
/// labels agree (inconsistent pairs). Per variable the score is
/// `labels[2v] - labels[2v+1]`; zero scores are broken by a seeded coin.
pub fn partition_to_assignment(labels: &[i8], seed: u64) -> Result<(Vec<i8>, usize), ReductionError> {
    if labels.len() % 2 != 0 {
        return Err(ReductionError::OddLength(labels.len()));
    }
    let mut coin = rng::stream(seed, streams::TIE_BREAK);
    let mut inconsistent = 0;
    let assignment = labels
        .chunks_exact(2)
        .map(|pair| {
            let score = i16::from(pair[0]) - i16::from(pair[1]);
            match score.signum() {
                1 => 1,
                -1 => -1,
                _ => {
                    inconsistent += 1;
                    if coin.random::<bool>() {
                        1
                    } else {
                        -1
                    }
                }
            }
        })
        .collect();
    Ok((assignment, inconsistent))
}
