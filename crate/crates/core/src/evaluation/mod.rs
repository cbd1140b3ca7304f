//! Experimental protocol: repeated stratified 2-fold splits, accuracy, the
//! benchmark grid over distances and the statistical comparison of its cells.

mod benchmark;
mod metrics;
mod qtable;
mod split;
mod stats;

use thiserror::Error;

pub use benchmark::{
    run_benchmark, run_benchmark_with, summarize, BenchOptions, BenchmarkMatrix, BenchmarkOutput, BenchmarkPlan, Cell,
    CellKey, CellResult, Summary, SummaryCell, FOLDS,
};
pub use metrics::{accuracy, balanced_accuracy, Metric};
pub use qtable::{nemenyi_q, studentized_range_cdf, NEMENYI_Q_05};
pub use split::{derive_seed, make_split, make_splits, SplitPlan};
pub use stats::{
    friedman, friedman_nemenyi, mid_ranks, nemenyi_cd, wilcoxon_signed_rank, FriedmanResult, NemenyiPair,
    NemenyiResult, StatReport, WilcoxonEntry, WilcoxonOutcome, WilcoxonResult, EXACT_LIMIT,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("class {class} has {count} sample(s); stratified 2-fold splitting needs at least 2")]
    TooFewSamplesPerClass { class: usize, count: usize },
    #[error("runs must be at least 1")]
    NoRuns,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    Empty,
    #[error("need at least {min} pairs, got {found}")]
    TooFewPairs { found: usize, min: usize },
    #[error("all paired differences are zero")]
    AllZeroDifferences,
    #[error("significance level {0} is outside (0, 1)")]
    BadAlpha(f64),
    #[error("need at least 3 classifiers, got {0}")]
    TooFewClassifiers(usize),
    #[error("need at least 2 blocks, got {0}")]
    TooFewBlocks(usize),
    #[error("classifier `{classifier}` has missing or failed cells on dataset `{dataset}`")]
    MissingCells { classifier: String, dataset: String },
    #[error("{0}")]
    Invalid(String),
}
