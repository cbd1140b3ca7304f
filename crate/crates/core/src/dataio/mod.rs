//! Dataset ingestion, normalization, forest archives and report files.
//!
//! Line and column numbers in errors are 1-based and refer to the source file.

mod archive;
mod csv_io;
mod dataset;
mod matrix_io;
mod normalize;
mod reports;
mod svmlight;

use std::path::PathBuf;

use thiserror::Error;

pub use archive::{load_forest, read_forest, save_forest, write_forest, ForestArchive, FORMAT_VERSION, MAGIC};
pub use csv_io::{load_csv, read_csv_table, write_csv, LabelColumn, RawTable};
pub use dataset::Dataset;
pub use matrix_io::{read_external_baselines, read_matrix_csv, write_matrix_csv, ExternalRow};
pub use normalize::{apply_normalization, fit_normalization, NormalizationMode, NormalizationSpec};
pub use reports::{write_reports, ManifestDataset, ReportFile, RunManifest};
pub use svmlight::{load_svmlight, read_svmlight_table};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRows { line: usize, expected: usize, found: usize },
    #[error("no data rows")]
    EmptyFile,
    #[error("line {line}, column {column}: non-numeric feature `{token}`")]
    NonNumericFeature { line: usize, column: usize, token: String },
    #[error("line {line}: feature index {index} does not ascend")]
    NonAscendingIndices { line: usize, index: usize },
    #[error("label column `{0}` not found")]
    MissingLabelColumn(String),
    #[error("dimension mismatch: expected {expected} features, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("archive format version {found} is not supported (this build reads version {supported})")]
    VersionMismatch { found: u32, supported: u32 },
    #[error("corrupt archive: {0}")]
    CorruptArchive(String),
    #[error("{0}")]
    Invalid(String),
}

impl DataError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        DataError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Parses a feature token, rejecting non-numbers and non-finite values.
pub(crate) fn parse_feature(token: &str, line: usize, column: usize) -> Result<f64, DataError> {
    let t = token.trim();
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(DataError::Parse {
            line,
            column,
            message: format!("non-finite value `{t}` ({v})"),
        }),
        Err(_) => Err(DataError::NonNumericFeature {
            line,
            column,
            token: t.to_string(),
        }),
    }
}

/// Shortest decimal text that parses back to the same `f64`.
pub(crate) fn fmt_exact(v: f64) -> String {
    format!("{v:?}")
}
