//! IO, experiments and command-line plumbing around the `bumptree` core.

pub mod bench;
pub mod config;
pub mod dump;
pub mod error;

pub use bench::{
    limited_bump_comparison, run_experiment, summarize, ExperimentConfig, ExperimentRow, SummaryRow,
};
pub use error::{Error, Result};
