//! Supervised optimum-path forest (OPF) classification with a catalogue of
//! 47 distance measures, plus the tooling to benchmark them: repeated
//! stratified 2-fold cross-validation, Wilcoxon signed-rank comparisons and
//! Friedman ranking with the Nemenyi critical difference.
//!
//! Modules:
//! * [`distances`]: the measures, their metadata and an axiom checker.
//! * [`forest`]: prototype estimation, training and classification.
//! * [`evaluation`]: splitting, accuracy, the benchmark grid and statistics.
//! * [`dataio`]: dataset loaders, normalization, model archives and reports.

pub mod dataio;
pub mod distances;
pub mod evaluation;
pub mod forest;

pub use distances::{DistanceId, FeatureVector};

/// Library version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
