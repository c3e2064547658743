//! Influence maximization with adversarial seed deactivation.
//!
//! A leader activates a budgeted seed set in a directed influence network;
//! an adversary then deactivates part of that seed set under its own
//! budget, and influence spreads by the linear-threshold rule with random
//! node thresholds. This crate provides:
//!
//! - [`graph`]: directed weighted influence graphs, a small-world
//!   generator, edge-list ingestion, and `-log`-weight shortest paths;
//! - [`diffusion`]: linear-threshold propagation and Latin-hypercube
//!   threshold sampling;
//! - [`saa`]: the adversary's exact best response on a sample, and a
//!   three-stage sample-average estimator with gap and confidence-interval
//!   statistics;
//! - [`lp`]: LP-format export of the sampled adversary model for external
//!   solver cross-checks;
//! - [`search`]: complete enumeration plus simulated-annealing and
//!   tabu-search matheuristics for the leader;
//! - [`instance`]: instance synthesis, budgets, and a text file format;
//! - [`bench`]: CSV experiment harness used by the `impd` binary.
//!
//! All randomness flows through named [`rng`] sub-streams, so every result
//! in the crate is reproducible from a single seed.

pub mod bench;
pub mod diffusion;
pub mod error;
pub mod graph;
pub mod instance;
pub mod lp;
pub mod rng;
pub mod saa;
pub mod search;
mod subsets;

pub use diffusion::{
    propagate, sample_thresholds_lhs, spread, spread_counts, DeactivationSet, LhsSampler,
    NodeSet, SeedSet, ThresholdSample, ThresholdSampler,
};
pub use error::{ImpdError, Result};
pub use graph::{
    generate_watts_strogatz, load_edge_list, shortest_path_matrix, InfluenceGraph,
    PathLengthMatrix,
};
pub use instance::{generate_instance, load_instance, BudgetRule, CostMode, ImpdInstance,
    InstanceSpec};
pub use saa::{saa_evaluate, solve_allp_exact, SaaParams, SaaReport};
pub use search::{
    sam_solve, solve_complete_enumeration, tsm_solve, SamParams, SearchOutcome, SpreadEvaluator,
    TsmParams,
};
