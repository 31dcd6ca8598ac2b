//! Stochastic and exact oracles: the random-recursive-tree construction of
//! the coalescent with its cutting-merge dynamics, SFS sampling under the
//! infinite-sites model, Poisson–Dirichlet and Chinese-restaurant samplers,
//! and an exact Markov chain on integer partitions for small `n`.
//!
//! Every random quantity is driven by [`rep_rng`], which derives an
//! independent ChaCha stream from `(seed, index)`. Parallel execution
//! therefore never changes a result.

mod oracle;
mod pd;
mod sfs;
mod tree;

pub use oracle::{partitions, OracleModel, MAX_ORACLE_N};
pub use pd::{
    mc_interval_sfs_infinite, sample_crp, sample_pd, sample_pd_with, PdSample, DEFAULT_MAX_PARTS,
    DEFAULT_TRUNCATION_MASS,
};
pub use sfs::{mean_and_se, simulate_lengths_and_sfs, RepSample, SimulationSummary};
pub use tree::{
    absorption_time, branch_lengths, figure_two_fixture, partition_at, sample_tree,
    sample_tree_with, trajectory, BlockTrajectory, CutMergeTree, MergeEvent, RecursiveTreeSample,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for replicate `index` of a run seeded with `seed`.
pub fn rep_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
