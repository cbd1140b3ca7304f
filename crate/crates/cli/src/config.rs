use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{Context, Result};
use serde::Deserialize;

use opf_core::dataio::{LabelColumn, NormalizationMode};
use opf_core::evaluation::Metric;
use opf_core::DistanceId;

use crate::UsageError;

/// Input file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DataFormat {
    Csv,
    Svmlight,
}

impl DataFormat {
    /// `.svm`, `.svmlight`, `.libsvm` and `.txt` files are svmlight; anything
    /// else is CSV.
    pub fn infer(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
            Some(ext) if ["svm", "svmlight", "libsvm", "txt"].contains(&ext.as_str()) => DataFormat::Svmlight,
            _ => DataFormat::Csv,
        }
    }
}

impl FromStr for DataFormat {
    type Err = UsageError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(DataFormat::Csv),
            "svmlight" | "libsvm" | "svm" => Ok(DataFormat::Svmlight),
            other => Err(UsageError(format!(
                "unknown data format `{other}` (expected csv or svmlight)"
            ))),
        }
    }
}

impl fmt::Display for DataFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DataFormat::Csv => "csv",
            DataFormat::Svmlight => "svmlight",
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ColumnRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Threads {
    Count(i64),
    Word(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    name: Option<String>,
    path: String,
    format: Option<String>,
    label_column: Option<ColumnRef>,
    has_header: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    datasets: Vec<RawDataset>,
    distances: Option<OneOrMany>,
    runs: Option<i64>,
    seed: Option<u64>,
    normalization: Option<String>,
    metric: Option<String>,
    alpha: Option<f64>,
    output_dir: String,
    parallelism: Option<Threads>,
    external_baselines: Option<String>,
    cache_distances: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub name: String,
    /// Path as written in the config.
    pub path: String,
    /// Path resolved against the config file's directory.
    pub resolved: PathBuf,
    pub format: DataFormat,
    pub label_column: LabelColumn,
    pub has_header: bool,
}

/// A validated benchmark configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub datasets: Vec<DatasetSpec>,
    pub distances: Vec<DistanceId>,
    pub runs: usize,
    pub seed: u64,
    pub normalization: NormalizationMode,
    pub metric: Metric,
    pub alpha: f64,
    pub output_dir: PathBuf,
    /// `None` uses every available core.
    pub parallelism: Option<usize>,
    pub external_baselines: Option<PathBuf>,
    pub cache_distances: bool,
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

pub fn parse_distances(codes: &[String]) -> Result<Vec<DistanceId>> {
    if codes.len() == 1 && codes[0].trim().eq_ignore_ascii_case("all") {
        return Ok(DistanceId::all().collect());
    }
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(codes.len());
    for code in codes {
        let id: DistanceId = code.parse().map_err(|_| usage(format!("unknown distance `{code}`")))?;
        if !seen.insert(id) {
            return Err(usage(format!("distance {id} listed twice")));
        }
        out.push(id);
    }
    if out.is_empty() {
        return Err(usage("no distances selected"));
    }
    Ok(out)
}

impl BenchConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Parses TOML text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| usage(e.to_string()))?;

        let runs = raw.runs.unwrap_or(25);
        if runs < 1 {
            return Err(usage(format!("runs must be at least 1, got {runs}")));
        }
        let codes = match raw.distances {
            None => vec!["all".to_string()],
            Some(OneOrMany::One(s)) => vec![s],
            Some(OneOrMany::Many(v)) => v,
        };
        let distances = parse_distances(&codes)?;
        let normalization = match raw.normalization.as_deref() {
            None => NormalizationMode::None,
            Some(s) => s.parse().map_err(|e| usage(format!("{e}")))?,
        };
        let metric = match raw.metric.as_deref() {
            None => Metric::Accuracy,
            Some(s) => s.parse().map_err(|e| usage(format!("{e}")))?,
        };
        let alpha = raw.alpha.unwrap_or(0.05);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(usage(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let parallelism = match raw.parallelism {
            None => None,
            Some(Threads::Word(w)) if w.eq_ignore_ascii_case("auto") => None,
            Some(Threads::Word(w)) => {
                return Err(usage(format!(
                    "parallelism must be \"auto\" or a positive integer, got `{w}`"
                )))
            }
            Some(Threads::Count(n)) if n >= 1 => Some(n as usize),
            Some(Threads::Count(n)) => return Err(usage(format!("parallelism must be positive, got {n}"))),
        };

        if raw.datasets.is_empty() {
            return Err(usage("no datasets configured"));
        }
        let mut datasets = Vec::with_capacity(raw.datasets.len());
        let mut paths = HashSet::new();
        let mut names = HashSet::new();
        for d in raw.datasets {
            let resolved = resolve(base, &d.path);
            let name = d.name.unwrap_or_else(|| {
                resolved
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| d.path.clone())
            });
            if !paths.insert(resolved.clone()) {
                return Err(usage(format!("dataset path `{}` listed twice", d.path)));
            }
            if !names.insert(name.clone()) {
                return Err(usage(format!("dataset name `{name}` listed twice")));
            }
            let format = match d.format.as_deref() {
                Some(f) => f.parse()?,
                None => DataFormat::infer(&resolved),
            };
            let label_column = match d.label_column {
                None => LabelColumn::Last,
                Some(ColumnRef::Index(i)) => LabelColumn::Index(i),
                Some(ColumnRef::Name(n)) => n.parse().map_err(|e| usage(format!("{e}")))?,
            };
            datasets.push(DatasetSpec {
                name,
                path: d.path,
                resolved,
                format,
                label_column,
                has_header: d.has_header.unwrap_or(true),
            });
        }

        Ok(BenchConfig {
            datasets,
            distances,
            runs: runs as usize,
            seed: raw.seed.unwrap_or(0),
            normalization,
            metric,
            alpha,
            output_dir: resolve(base, &raw.output_dir),
            parallelism,
            external_baselines: raw.external_baselines.map(|p| resolve(base, &p)),
            cache_distances: raw.cache_distances.unwrap_or(false),
        })
    }
}
