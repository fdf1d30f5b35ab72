use rand::seq::SliceRandom;
use rand::Rng;

use super::{check_signs, BipartiteGraph, BlockModelParams, HiddenPartition, InstanceError};
use crate::rng::{self, streams};

/// Samples `B(n1, n2, P1, P2, delta, p)`.
///
/// Without a supplied partition a uniformly random balanced one is drawn
/// first. Edges are generated block by block with geometric skipping, so the
/// cost is proportional to the number of edges rather than `n1 * n2`. The
/// returned edge list is sorted.
pub fn sample_bipartite_block(
    params: &BlockModelParams,
    partition: Option<HiddenPartition>,
) -> Result<(BipartiteGraph, HiddenPartition), InstanceError> {
    params.validate()?;
    let partition = match partition {
        Some(part) => {
            if part.u.len() != params.n1 || part.v.len() != params.n2 {
                return Err(InstanceError::PartitionShape {
                    u: part.u.len(),
                    v: part.v.len(),
                    n1: params.n1,
                    n2: params.n2,
                });
            }
            part.validate()?;
            part
        }
        None => {
            if params.n1 % 2 != 0 {
                return Err(InstanceError::OddSide { side: "n1", value: params.n1 });
            }
            if params.n2 % 2 != 0 {
                return Err(InstanceError::OddSide { side: "n2", value: params.n2 });
            }
            let mut rng = rng::stream(params.seed, streams::PARTITION);
            HiddenPartition {
                u: balanced_signs(&mut rng, params.n1),
                v: balanced_signs(&mut rng, params.n2),
            }
        }
    };

    let (a1, b1) = split_by_sign(&partition.u);
    let (a2, b2) = split_by_sign(&partition.v);
    let same = params.same_side_probability();
    let cross = params.crossing_probability();

    let mut rng = rng::stream(params.seed, streams::EDGES);
    let mut edges = Vec::new();
    for (left, right, prob) in [(&a1, &a2, same), (&b1, &b2, same), (&a1, &b2, cross), (&b1, &a2, cross)] {
        sample_block(&mut rng, left, right, prob, &mut edges);
    }
    edges.sort_unstable();

    let graph = BipartiteGraph { n1: params.n1, n2: params.n2, edges };
    Ok((graph, partition))
}

fn balanced_signs<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<i8> {
    let mut signs: Vec<i8> = (0..n).map(|i| if i < n / 2 { 1 } else { -1 }).collect();
    signs.shuffle(rng);
    signs
}

fn split_by_sign(signs: &[i8]) -> (Vec<usize>, Vec<usize>) {
    debug_assert!(check_signs(signs).is_ok());
    (0..signs.len()).partition(|&i| signs[i] > 0)
}

/// Bernoulli(prob) over every pair of `left x right`, by geometric skipping.
fn sample_block<R: Rng + ?Sized>(
    rng: &mut R,
    left: &[usize],
    right: &[usize],
    prob: f64,
    out: &mut Vec<(usize, usize)>,
) {
    let cells = left.len() as u64 * right.len() as u64;
    if cells == 0 || prob <= 0.0 {
        return;
    }
    let width = right.len() as u64;
    if prob >= 1.0 {
        for &i in left {
            out.extend(right.iter().map(|&j| (i, j)));
        }
        return;
    }
    let log_q = (1.0 - prob).ln();
    let mut pos: u64 = 0;
    loop {
        // number of failures before the next success
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / log_q).floor();
        if !skip.is_finite() || skip >= (cells - pos) as f64 {
            break;
        }
        pos += skip as u64;
        out.push((left[(pos / width) as usize], right[(pos % width) as usize]));
        pos += 1;
        if pos >= cells {
            break;
        }
    }
}
