//! Weighted binary search trees and the "bump" hill-climbing optimizer.
//!
//! Keys are identified with their in-order rank, so a tree over `n` keys is an
//! arena of `n` nodes whose [`NodeId`]s double as keys. Every node carries a
//! search probability and the aggregate probability of its subtree; the
//! expected lookup cost of a tree is `sum(depth(x) * weight(x))` with the root
//! at depth 1.
//!
//! The crate provides:
//!
//! * [`tree`]: the arena tree, rotations, bumps, cost and validation.
//! * [`weights`]: Zipf weight profiles, entropy bounds, query sampling.
//! * [`builders`]: simple random, treap, weight-balanced and splay trees.
//! * [`optimal`]: the exact optimum via Knuth's O(n²) dynamic program.
//! * [`optimizer`]: merits, the lazy max-merit queue, and the bump loop.
//! * [`oracle`]: brute-force ground truth for small instances.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod builders;
pub mod error;
pub mod optimal;
pub mod optimizer;
pub mod oracle;
pub mod tree;
pub mod weights;

mod rng;

pub use builders::BuilderKind;
pub use error::{Error, Violation};
pub use optimal::{optimal_cost_only, optimal_tree, DpTables, DEFAULT_OPTIMAL_CAP};
pub use optimizer::{
    merit, merit_all, optimize, optimize_step, MeritQueue, OptimizeReport, OptimizerConfig,
    Termination, DEFAULT_EPSILON,
};
pub use tree::{NodeId, Side, WeightedTree};
pub use weights::{entropy, mehlhorn_bounds, MehlhornBounds, QuerySampler, WeightProfile};

pub type Result<T, E = Error> = core::result::Result<T, E>;
