use std::collections::HashMap;

use rand::Rng;

use super::SolveError;
use crate::instances::BipartiteGraph;
use crate::rng::{self, streams};

/// Right vertices with at least one edge in a sub-graph, with constant-time
/// membership and a dense slot per member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RightSupport {
    vertices: Vec<usize>,
    slot: HashMap<usize, usize>,
}

impl RightSupport {
    /// Support covering every right vertex `0..n2`; used to feed dense test
    /// vectors through the implicit products.
    pub fn full(n2: usize) -> Self {
        RightSupport { vertices: (0..n2).collect(), slot: (0..n2).map(|j| (j, j)).collect() }
    }

    pub fn slot(&self, j: usize) -> Option<usize> {
        self.slot.get(&j).copied()
    }

    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// One of the `T` edge-disjoint sub-graphs, stored as left-indexed
/// adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubGraph {
    n1: usize,
    n2: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    /// `slots[e]` is the support slot of `cols[e]`.
    slots: Vec<usize>,
    support: RightSupport,
}

impl SubGraph {
    pub fn from_edges(n1: usize, n2: usize, edges: &[(usize, usize)]) -> Self {
        let mut row_start = vec![0usize; n1 + 1];
        for &(i, _) in edges {
            row_start[i + 1] += 1;
        }
        for i in 0..n1 {
            row_start[i + 1] += row_start[i];
        }
        let mut fill = row_start.clone();
        let mut cols = vec![0usize; edges.len()];
        for &(i, j) in edges {
            cols[fill[i]] = j;
            fill[i] += 1;
        }
        let mut support = RightSupport { vertices: Vec::new(), slot: HashMap::with_capacity(edges.len()) };
        let slots = cols
            .iter()
            .map(|&j| {
                *support.slot.entry(j).or_insert_with(|| {
                    support.vertices.push(j);
                    support.vertices.len() - 1
                })
            })
            .collect();
        SubGraph { n1, n2, row_start, cols, slots, support }
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn edge_count(&self) -> usize {
        self.cols.len()
    }

    pub fn support(&self) -> &RightSupport {
        &self.support
    }

    /// Right neighbours of left vertex `i`.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.cols[self.row_start[i]..self.row_start[i + 1]]
    }

    pub(crate) fn row_slots(&self, i: usize) -> &[usize] {
        &self.slots[self.row_start[i]..self.row_start[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row_start[i + 1] - self.row_start[i]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n1).flat_map(move |i| self.row(i).iter().map(move |&j| (i, j)))
    }
}

/// The input edges partitioned into `T` sub-graphs, with centering constant
/// `q = p / T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitGraphs {
    pub subs: Vec<SubGraph>,
    pub q: f64,
}

impl SplitGraphs {
    pub fn t(&self) -> usize {
        self.subs.len()
    }
}

/// Places each edge independently into one of `t` sub-graphs uniformly at
/// random, deterministically in `seed`.
pub fn split_edges(graph: &BipartiteGraph, t: usize, p: f64, seed: u64) -> Result<SplitGraphs, SolveError> {
    if t < 2 {
        return Err(SolveError::Config(format!("T must be at least 2, got {t}")));
    }
    let mut rng = rng::stream(seed, streams::SPLIT);
    let mut buckets: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(graph.edges.len() / t + 1); t];
    for &e in &graph.edges {
        buckets[rng.random_range(0..t)].push(e);
    }
    let subs = buckets.iter().map(|b| SubGraph::from_edges(graph.n1, graph.n2, b)).collect();
    Ok(SplitGraphs { subs, q: p / t as f64 })
}
