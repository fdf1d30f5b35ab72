//! Planted constraint satisfaction problems and bipartite stochastic block
//! models: seeded instance generation, Fourier analysis of planting
//! distributions, reduction from planted CSPs to block models, and recovery of
//! the hidden partition with subsampled power iteration.
//!
//! The crate is organised bottom-up:
//!
//! * [`instances`] generates block model graphs, planted CSP formulas and
//!   Goldreich-style predicate constraints, and reads/writes them as JSON lines.
//! * [`fourier`] computes Walsh coefficients of planting distributions and
//!   predicates, the distribution complexity and the induced bias.
//! * [`reduction`] turns a planted CSP into a bipartite block model graph.
//! * [`solver`] holds subsampled power iteration together with the majority
//!   vote and plain power iteration baselines.
//! * [`harness`] wires everything into end-to-end solves, density sweeps and the
//!   `spi` command line tool.

pub mod fourier;
pub mod harness;
pub mod instances;
pub mod reduction;
pub mod rng;
pub mod solver;

pub use fourier::{Complexity, FourierReport};
pub use instances::{
    overlap, BipartiteGraph, BlockModelParams, GoldreichInstance, HiddenPartition, Literal,
    PlantedCspInstance, PlantingDistribution,
};
pub use reduction::{ReducedInstance, ReductionOptions, Thinning};
pub use solver::{spi_solve, RecoveryResult, SolverConfig};
