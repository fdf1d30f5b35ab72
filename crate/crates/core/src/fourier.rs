//! Walsh–Fourier analysis of planting distributions and predicates on `{±1}^k`.
//!
//! Subsets `S ⊆ {0, .., k-1}` are positions inside a clause, 0-based, and are
//! encoded as bitmasks internally. `chi_S(z) = prod_{i in S} z_i` and the
//! coefficient of a function `f` is `f̂(S) = 2^-k sum_z f(z) chi_S(z)`.

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instances::{check_signs, table_width, InstanceError, PlantingDistribution};

/// Coefficients with magnitude at or below this are treated as zero.
pub const ZERO_TOLERANCE: f64 = 1e-9;

/// Above this width the fast transform replaces direct summation.
pub const DIRECT_MAX_K: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum FourierError {
    #[error("subset index {index} out of range for k = {k}")]
    SubsetOutOfRange { index: usize, k: usize },
    #[error("repeated index {0} in subset")]
    RepeatedIndex(usize),
    #[error(transparent)]
    Table(#[from] InstanceError),
}

/// Smallest degree with a nonzero coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Complexity {
    /// `Finite(0)` marks a constant predicate.
    Finite(usize),
    /// Uniform distribution: every non-empty coefficient vanishes.
    Infinite,
}

impl Complexity {
    pub fn finite(self) -> Option<usize> {
        match self {
            Complexity::Finite(r) => Some(r),
            Complexity::Infinite => None,
        }
    }
}

impl Serialize for Complexity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Complexity::Finite(r) => s.serialize_u64(*r as u64),
            Complexity::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Complexity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(usize),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(r) => Ok(Complexity::Finite(r)),
            Raw::Str(s) if s == "inf" => Ok(Complexity::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("unexpected complexity {s:?}"))),
        }
    }
}

/// Outcome of the lowest-degree scan.
///
/// For a planting distribution `delta = 1 + 2^k Q̂(S)` with `Q` normalised to
/// sum to one; equivalently `delta / 2` is the probability that the clause
/// restricted to `S` has `chi_S = +1`. For a predicate `delta = 1 + P̂(S)`,
/// the same quantity for constraints whose sign is folded into the literals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierReport {
    pub r: Complexity,
    #[serde(rename = "S")]
    pub subset: Vec<usize>,
    pub coefficient: f64,
    pub delta: f64,
}

impl FourierReport {
    /// Sign of the witness coefficient: `+1` if `chi_S` correlates positively.
    pub fn correlation_sign(&self) -> i8 {
        if self.coefficient < 0.0 {
            -1
        } else {
            1
        }
    }
}

fn mask_of(subset: &[usize], k: usize) -> Result<usize, FourierError> {
    let mut mask = 0usize;
    for &i in subset {
        if i >= k {
            return Err(FourierError::SubsetOutOfRange { index: i, k });
        }
        if mask >> i & 1 == 1 {
            return Err(FourierError::RepeatedIndex(i));
        }
        mask |= 1 << i;
    }
    Ok(mask)
}

/// `chi_S` at the pattern with table index `x`: bit set means `z_i = +1`, so
/// the character is `-1` to the number of positions in `S` with `z_i = -1`.
fn character(mask: usize, x: usize) -> f64 {
    if (mask & !x).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `2^-k sum_z f(z) chi_S(z)` for a single subset.
fn coefficient_direct(table: &[f64], mask: usize) -> f64 {
    let sum: f64 = table.iter().enumerate().map(|(x, &f)| f * character(mask, x)).sum();
    sum / table.len() as f64
}

/// All `2^k` coefficients by direct summation, indexed by subset mask.
pub fn walsh_direct(table: &[f64]) -> Vec<f64> {
    (0..table.len()).map(|mask| coefficient_direct(table, mask)).collect()
}

/// All `2^k` coefficients by the in-place butterfly, indexed by subset mask.
pub fn walsh_fast(table: &[f64]) -> Vec<f64> {
    let n = table.len();
    debug_assert!(n.is_power_of_two());
    let mut a = table.to_vec();
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                // bit set means +1; the high half of each pair carries z_i = +1
                let (lo, hi) = (a[i], a[i + h]);
                a[i] = hi + lo;
                a[i + h] = hi - lo;
            }
        }
        h *= 2;
    }
    // after the butterfly, index with bit i set holds sum f(z) z_i-weighted;
    // its positions already coincide with subset masks
    a.iter_mut().for_each(|c| *c /= n as f64);
    a
}

fn walsh(table: &[f64]) -> Vec<f64> {
    if table.len() <= 1 << DIRECT_MAX_K {
        walsh_direct(table)
    } else {
        walsh_fast(table)
    }
}

/// `Q̂(S)` of the planting distribution normalised to total mass one.
pub fn fourier_coefficient(q: &PlantingDistribution, subset: &[usize]) -> Result<f64, FourierError> {
    let mask = mask_of(subset, q.k())?;
    Ok(coefficient_direct(&q.normalized(), mask))
}

/// Subset masks of size `size` in lexicographic order of their sorted
/// position lists.
fn subsets_of_size(k: usize, size: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..k).combinations(size)
}

/// First subset, by increasing size then lexicographically, whose
/// coefficient exceeds [`ZERO_TOLERANCE`] in magnitude.
fn lowest_degree(coeffs: &[f64], k: usize) -> Option<(Vec<usize>, f64)> {
    (1..=k).find_map(|size| {
        subsets_of_size(k, size).find_map(|s| {
            let mask = s.iter().fold(0usize, |m, &i| m | 1 << i);
            let c = coeffs[mask];
            (c.abs() > ZERO_TOLERANCE).then_some((s, c))
        })
    })
}

/// Distribution complexity `r(Q)` with its witness subset and induced bias.
pub fn distribution_complexity(q: &PlantingDistribution) -> FourierReport {
    let k = q.k();
    let coeffs = walsh(&q.normalized());
    match lowest_degree(&coeffs, k) {
        Some((subset, c)) => FourierReport {
            r: Complexity::Finite(subset.len()),
            subset,
            coefficient: c,
            delta: 1.0 + (1u64 << k) as f64 * c,
        },
        None => FourierReport { r: Complexity::Infinite, subset: Vec::new(), coefficient: 0.0, delta: 1.0 },
    }
}

/// Every subset of the given size with a nonzero coefficient, in scan order.
/// Supports trying witnesses other than the lexicographically first.
pub fn witnesses_of_degree(q: &PlantingDistribution, size: usize) -> Vec<(Vec<usize>, f64)> {
    let k = q.k();
    let coeffs = walsh(&q.normalized());
    subsets_of_size(k, size)
        .filter_map(|s| {
            let mask = s.iter().fold(0usize, |m, &i| m | 1 << i);
            (coeffs[mask].abs() > ZERO_TOLERANCE).then_some((s, coeffs[mask]))
        })
        .collect()
}

/// All coefficients `P̂(S)` of a ±1 predicate, indexed by subset mask.
pub fn predicate_spectrum(predicate: &[i8]) -> Result<Vec<f64>, FourierError> {
    table_width(predicate.len())?;
    check_signs(predicate)?;
    let table: Vec<f64> = predicate.iter().map(|&b| f64::from(b)).collect();
    Ok(walsh(&table))
}

/// Lowest nonzero degree of a ±1 predicate. A constant predicate comes back
/// as `Finite(0)` with the empty subset.
pub fn predicate_lowest_degree(predicate: &[i8]) -> Result<FourierReport, FourierError> {
    let k = table_width(predicate.len())?;
    let coeffs = predicate_spectrum(predicate)?;
    Ok(match lowest_degree(&coeffs, k) {
        Some((subset, c)) => FourierReport { r: Complexity::Finite(subset.len()), subset, coefficient: c, delta: 1.0 + c },
        None => FourierReport { r: Complexity::Finite(0), subset: Vec::new(), coefficient: coeffs[0], delta: 1.0 + coeffs[0] },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{majority_predicate, parity_predicate};

    fn noisy_parity3(eta: f64) -> PlantingDistribution {
        PlantingDistribution::noisy_xor(3, eta).unwrap()
    }

    #[test]
    fn uniform_has_zero_nonempty_coefficients() {
        let q = PlantingDistribution::uniform(4);
        assert_eq!(fourier_coefficient(&q, &[0, 2]).unwrap(), 0.0);
        assert_eq!(fourier_coefficient(&q, &[]).unwrap(), 1.0 / 16.0);
        assert_eq!(distribution_complexity(&q).r, Complexity::Infinite);
    }

    #[test]
    fn empty_subset_is_the_mean() {
        let q = PlantingDistribution::new(vec![3.0, 0.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0]).unwrap();
        assert!((fourier_coefficient(&q, &[]).unwrap() - 1.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn noisy_parity_top_coefficient() {
        let q = noisy_parity3(0.6);
        // (1 + 0.6 z1 z2 z3) / 8 normalised: coefficient eta / 8
        assert!((fourier_coefficient(&q, &[0, 1, 2]).unwrap() - 0.075).abs() < 1e-15);
        let report = distribution_complexity(&q);
        assert_eq!(report.r, Complexity::Finite(3));
        assert_eq!(report.subset, vec![0, 1, 2]);
        assert!((report.delta - 1.6).abs() < 1e-12);
    }

    #[test]
    fn planted_3sat_has_complexity_one() {
        let report = distribution_complexity(&PlantingDistribution::k_sat(3));
        assert_eq!(report.r, Complexity::Finite(1));
        assert_eq!(report.subset, vec![0]);
        assert!((report.coefficient - 1.0 / 56.0).abs() < 1e-15);
        assert!((report.delta - 8.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn subset_errors() {
        let q = PlantingDistribution::uniform(3);
        assert_eq!(fourier_coefficient(&q, &[3]), Err(FourierError::SubsetOutOfRange { index: 3, k: 3 }));
        assert_eq!(fourier_coefficient(&q, &[1, 1]), Err(FourierError::RepeatedIndex(1)));
    }

    #[test]
    fn predicate_degrees() {
        let parity = predicate_lowest_degree(&parity_predicate(4)).unwrap();
        assert_eq!(parity.r, Complexity::Finite(4));
        assert!((parity.coefficient - 1.0).abs() < 1e-15);

        let maj = predicate_lowest_degree(&majority_predicate(3)).unwrap();
        assert_eq!(maj.r, Complexity::Finite(1));
        assert_eq!(maj.subset, vec![0]);
        assert!((maj.coefficient - 0.5).abs() < 1e-15);

        let constant = predicate_lowest_degree(&[1, 1, 1, 1]).unwrap();
        assert_eq!(constant.r, Complexity::Finite(0));
        assert!(predicate_lowest_degree(&[1, 2]).is_err());
    }

    #[test]
    fn fast_and_direct_transforms_agree() {
        for k in 1..=10 {
            let table: Vec<f64> = (0..1usize << k).map(|x| ((x * 7919) % 31) as f64 - 11.0).collect();
            let a = walsh_direct(&table);
            let b = walsh_fast(&table);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-9, "k = {k}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn report_json_shape() {
        let report = distribution_complexity(&PlantingDistribution::uniform(2));
        assert_eq!(serde_json::to_string(&report).unwrap(), r#"{"r":"inf","S":[],"coefficient":0.0,"delta":1.0}"#);
        let back: FourierReport = serde_json::from_str(r#"{"r":2,"S":[0,1],"coefficient":0.1,"delta":1.4}"#).unwrap();
        assert_eq!(back.r, Complexity::Finite(2));
    }

    #[test]
    fn witnesses_list_every_nonzero_subset() {
        let q = PlantingDistribution::from_fn(3, |z| 1.0 + 0.5 * f64::from(z[0] * z[1]) + 0.25 * f64::from(z[1] * z[2])).unwrap();
        let w: Vec<Vec<usize>> = witnesses_of_degree(&q, 2).into_iter().map(|(s, _)| s).collect();
        assert_eq!(w, vec![vec![0, 1], vec![1, 2]]);
    }
}
