use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{distinct_tuple, index_pattern, pattern_index, random_signs, table_width, InstanceError, Literal, PlantedCspInstance};
use crate::rng::{self, streams};

/// Unnormalised weights over `{±1}^k`; see [`pattern_index`] for the layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantingDistribution {
    k: usize,
    weights: Vec<f64>,
}

impl PlantingDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self, InstanceError> {
        let k = table_width(weights.len())?;
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(InstanceError::NegativeWeight);
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(InstanceError::ZeroDistribution);
        }
        Ok(PlantingDistribution { k, weights })
    }

    /// Builds the table from a weight function of the pattern.
    pub fn from_fn(k: usize, f: impl Fn(&[i8]) -> f64) -> Result<Self, InstanceError> {
        Self::new((0..1usize << k).map(|idx| f(&index_pattern(idx, k))).collect())
    }

    /// Uniform over all `2^k` patterns.
    pub fn uniform(k: usize) -> Self {
        PlantingDistribution { k, weights: vec![1.0; 1 << k] }
    }

    /// Uniform over the patterns with at least one TRUE literal (planted k-SAT).
    pub fn k_sat(k: usize) -> Self {
        Self::from_fn(k, |z| if z.iter().any(|&x| x > 0) { 1.0 } else { 0.0 }).expect("k >= 1")
    }

    /// Noisy k-XOR: `Q(z) ∝ 1 + eta * z_1 ... z_k`, `|eta| <= 1`.
    pub fn noisy_xor(k: usize, eta: f64) -> Result<Self, InstanceError> {
        Self::from_fn(k, |z| 1.0 + eta * z.iter().map(|&x| f64::from(x)).product::<f64>())
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weights scaled to sum to one.
    pub fn normalized(&self) -> Vec<f64> {
        let total = self.total();
        self.weights.iter().map(|w| w / total).collect()
    }

    pub fn weight(&self, pattern: &[i8]) -> f64 {
        self.weights[pattern_index(pattern.iter().copied())]
    }
}

/// Samples `F_{Q,sigma}(n, m)` with a uniformly random planted assignment.
///
/// Each clause is drawn by rejection: propose a uniform ordered tuple of
/// distinct variables with uniform signs, accept with probability
/// `Q(sigma(C)) / max Q`. The proposal is uniform over all clauses, so the
/// accepted clause has law `Q_sigma`.
pub fn sample_planted_csp(
    q: &PlantingDistribution,
    n: usize,
    m: usize,
    seed: u64,
) -> Result<PlantedCspInstance, InstanceError> {
    let k = q.k();
    if n < k {
        return Err(InstanceError::TooFewVariables { n, k });
    }
    let sigma = random_signs(&mut rng::stream(seed, streams::ASSIGNMENT), n);
    let max = q.weights().iter().cloned().fold(0.0, f64::max);
    let accept: Vec<f64> = q.weights().iter().map(|w| w / max).collect();

    let mut rng = rng::stream(seed, streams::CLAUSES);
    let mut clauses = Vec::with_capacity(m);
    while clauses.len() < m {
        let vars = distinct_tuple(&mut rng, n, k);
        let clause: Vec<Literal> = vars
            .into_iter()
            .map(|v| Literal::new(v, if rng.random::<bool>() { 1 } else { -1 }))
            .collect();
        let a = accept[pattern_index(clause.iter().map(|l| l.value(&sigma)))];
        if a >= 1.0 || rng.random::<f64>() < a {
            clauses.push(clause);
        }
    }
    Ok(PlantedCspInstance { n, k, sigma: Some(sigma), clauses })
}
