use super::{check_signs, distinct_tuple, eval_table, random_signs, table_width, GoldreichInstance, InstanceError};
use crate::rng::{self, streams};

/// Samples `m` constraints `P(sigma at tuple)` over uniform ordered tuples of
/// distinct variables, with a uniform planted assignment.
pub fn sample_goldreich(predicate: &[i8], n: usize, m: usize, seed: u64) -> Result<GoldreichInstance, InstanceError> {
    let k = table_width(predicate.len())?;
    check_signs(predicate).map_err(|_| InstanceError::PredicateValue)?;
    if n < k {
        return Err(InstanceError::TooFewVariables { n, k });
    }
    let sigma = random_signs(&mut rng::stream(seed, streams::ASSIGNMENT), n);
    let mut rng = rng::stream(seed, streams::CLAUSES);
    let constraints = (0..m)
        .map(|_| {
            let vars = distinct_tuple(&mut rng, n, k);
            let value = eval_table(predicate, vars.iter().map(|&v| sigma[v]));
            (vars, value)
        })
        .collect();
    Ok(GoldreichInstance { n, predicate: predicate.to_vec(), sigma: Some(sigma), constraints })
}

/// Truth table of a predicate given as a function of the ±1 inputs.
pub fn predicate_table(k: usize, f: impl Fn(&[i8]) -> i8) -> Vec<i8> {
    (0..1usize << k).map(|idx| f(&super::index_pattern(idx, k))).collect()
}

/// `x_1 x_2 ... x_k`.
pub fn parity_predicate(k: usize) -> Vec<i8> {
    predicate_table(k, |x| x.iter().product())
}

/// Majority of an odd number of inputs.
pub fn majority_predicate(k: usize) -> Vec<i8> {
    predicate_table(k, |x| if x.iter().map(|&v| i32::from(v)).sum::<i32>() > 0 { 1 } else { -1 })
}
