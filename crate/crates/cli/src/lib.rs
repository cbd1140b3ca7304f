//! Command-line driver: `train`, `predict`, `axioms`, `bench` and `rank`.
//!
//! Exit codes: 0 success, 1 data or domain error, 2 usage or config error.

pub mod bench;
pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::LazyLock;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use opf_core::dataio::{
    fit_normalization, load_csv, load_forest, load_svmlight, read_csv_table, read_matrix_csv, read_svmlight_table,
    save_forest, write_reports, Dataset, ForestArchive, LabelColumn, NormalizationMode, RawTable, RunManifest,
    FORMAT_VERSION,
};
use opf_core::distances::{check_axioms, Axiom};
use opf_core::evaluation::{friedman_nemenyi, summarize};
use opf_core::forest::{train_with, TrainOptions, TrainingGraph};
use opf_core::{DistanceId, FeatureVector};

pub use config::{BenchConfig, DataFormat};

/// Marks errors that should exit with status 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// 2 for usage and config errors, 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.chain().any(|e| e.is::<UsageError>()) {
        2
    } else {
        1
    }
}

static VERSION: LazyLock<String> = LazyLock::new(|| {
    format!(
        "{} (opf-core {}, archive format {FORMAT_VERSION})",
        env!("CARGO_PKG_VERSION"),
        opf_core::VERSION
    )
});

#[derive(Debug, Parser)]
#[command(name = "opf", version = VERSION.as_str(), about = "Optimum-path forest classification and distance benchmarking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a forest and save it as an archive.
    Train(TrainArgs),
    /// Classify rows with a saved forest.
    Predict(PredictArgs),
    /// Check the metric axioms of distances on random vectors.
    Axioms(AxiomsArgs),
    /// Run a benchmark grid from a TOML config.
    Bench(BenchArgs),
    /// Recompute statistics and reports from an existing matrix.csv.
    Rank(RankArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Data file (CSV or svmlight).
    #[arg(long)]
    pub data: PathBuf,
    /// `csv` or `svmlight`; inferred from the extension when omitted.
    #[arg(long)]
    pub format: Option<String>,
    /// Label column of a CSV file: `last`, a 0-based index or a header name.
    #[arg(long, default_value = "last")]
    pub label_column: String,
    /// The CSV file has no header row.
    #[arg(long)]
    pub no_header: bool,
}

impl InputArgs {
    fn format(&self) -> Result<DataFormat> {
        match &self.format {
            Some(f) => Ok(f.parse()?),
            None => Ok(DataFormat::infer(&self.data)),
        }
    }

    fn label_column(&self) -> Result<LabelColumn> {
        self.label_column.parse().map_err(|e| UsageError(format!("{e}")).into())
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Distance code (D1..D47) or name.
    #[arg(long)]
    pub distance: String,
    /// Recorded for reproducibility; training itself is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `none` or `min_max_01`, fitted on the training data.
    #[arg(long, default_value = "none")]
    pub normalization: String,
    #[arg(long)]
    pub model_out: PathBuf,
    /// Precompute all pairwise distances (n² memory).
    #[arg(long)]
    pub cache_distances: bool,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub input: InputArgs,
    /// Every CSV column is a feature; no accuracy is reported.
    #[arg(long)]
    pub unlabeled: bool,
    /// Output CSV: row, label, cost, conqueror.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AxiomsArgs {
    /// Distance code, name, or `all`.
    #[arg(long, default_value = "all")]
    pub distance: String,
    /// Number of random vectors.
    #[arg(long, default_value_t = 20)]
    pub vectors: usize,
    #[arg(long, default_value_t = 5)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// TOML config file.
    pub config: PathBuf,
    /// Worker threads, overriding the config.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Ignore any existing cell journal.
    #[arg(long)]
    pub fresh: bool,
    /// No progress output.
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Matrix CSV written by `bench`.
    #[arg(long)]
    pub matrix: PathBuf,
    /// External baseline scores to merge as extra classifiers.
    #[arg(long)]
    pub external: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub output_dir: PathBuf,
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub(crate) fn load_dataset(path: &Path, format: DataFormat, label: &LabelColumn, has_header: bool) -> Result<Dataset> {
    let ds = match format {
        DataFormat::Csv => load_csv(path, label, has_header),
        DataFormat::Svmlight => load_svmlight(path),
    };
    ds.with_context(|| format!("loading {}", path.display()))
}

fn parse_distance(code: &str) -> Result<DistanceId> {
    code.parse()
        .map_err(|_| UsageError(format!("unknown distance `{code}` (expected D1..D47 or a name)")).into())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(a) => cmd_train(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Axioms(a) => cmd_axioms(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Rank(a) => cmd_rank(&a),
    }
}

fn cmd_train(a: &TrainArgs) -> Result<()> {
    let distance = parse_distance(&a.distance)?;
    let mode: NormalizationMode = a.normalization.parse().map_err(|e| UsageError(format!("{e}")))?;
    let ds = load_dataset(
        &a.input.data,
        a.input.format()?,
        &a.input.label_column()?,
        !a.input.no_header,
    )?;
    let start = Instant::now();
    let normalization = fit_normalization(ds.samples(), mode)?;
    let samples = ds
        .samples()
        .iter()
        .map(|s| normalization.apply_sample(s))
        .collect::<Result<Vec<_>, _>>()?;
    let graph = TrainingGraph::new(samples, distance)?;
    let forest = train_with(
        &graph,
        TrainOptions {
            cache_distances: a.cache_distances,
        },
    )?;
    let seconds = start.elapsed().as_secs_f64();
    let archive = ForestArchive {
        forest,
        normalization,
        class_names: ds.class_names().map(<[String]>::to_vec),
    };
    save_forest(&a.model_out, &archive)?;
    println!("distance = \"{}\"", distance.code());
    println!("samples = {}", archive.forest.len());
    println!("features = {}", archive.forest.dim());
    println!("classes = {}", ds.n_classes());
    println!("prototypes = {}", archive.forest.prototypes().len());
    println!("normalization = \"{mode}\"");
    println!("seed = {}", a.seed);
    println!("train_seconds = {seconds:.6}");
    println!("model = \"{}\"", a.model_out.display());
    Ok(())
}

fn read_queries(a: &PredictArgs, dim: usize) -> Result<RawTable> {
    let label = a.input.label_column()?;
    let table = match a.input.format()? {
        DataFormat::Csv => read_csv_table(&a.input.data, (!a.unlabeled).then_some(&label), !a.input.no_header),
        DataFormat::Svmlight => read_svmlight_table(&a.input.data, Some(dim)),
    };
    let mut table = table.with_context(|| format!("loading {}", a.input.data.display()))?;
    if a.unlabeled {
        table.labels = None;
    }
    Ok(table)
}

fn cmd_predict(a: &PredictArgs) -> Result<()> {
    let archive = load_forest(&a.model).with_context(|| format!("loading {}", a.model.display()))?;
    let forest = &archive.forest;
    let table = read_queries(a, forest.dim())?;
    let label_text = |l: u32| match &archive.class_names {
        Some(names) => names.get(l as usize).cloned().unwrap_or_else(|| l.to_string()),
        None => l.to_string(),
    };

    let mut out = String::from("row,label,cost,conqueror\n");
    let mut correct = 0usize;
    for (i, row) in table.rows.iter().enumerate() {
        let v = FeatureVector::new(row.clone()).with_context(|| format!("row {}", i + 1))?;
        let v = archive
            .normalization
            .apply(&v)
            .with_context(|| format!("row {}", i + 1))?;
        let p = forest.classify(&v).with_context(|| format!("row {}", i + 1))?;
        let text = label_text(p.label);
        if let Some(truth) = &table.labels {
            correct += usize::from(truth[i] == text);
        }
        let _ = writeln!(
            out,
            "{i},{},{:?},{}",
            csv_text(&text),
            p.cost,
            forest.samples()[p.conqueror].id
        );
    }
    fs::write(&a.out, out).with_context(|| format!("writing {}", a.out.display()))?;
    println!("rows = {}", table.rows.len());
    if table.labels.is_some() && !table.rows.is_empty() {
        println!("accuracy = {:?}", correct as f64 / table.rows.len() as f64);
    }
    Ok(())
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cmd_axioms(a: &AxiomsArgs) -> Result<()> {
    let ids = if a.distance.trim().eq_ignore_ascii_case("all") {
        DistanceId::all().collect()
    } else {
        vec![parse_distance(&a.distance)?]
    };
    if a.vectors == 0 || a.dim == 0 {
        bail!(UsageError("--vectors and --dim must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    // Positive components keep every measure inside its domain.
    let samples: Vec<FeatureVector> = (0..a.vectors)
        .map(|_| FeatureVector::new((0..a.dim).map(|_| rng.random_range(0.01..1.0)).collect()).expect("finite"))
        .collect();
    let mut table = String::from("code,name,identity,symmetry,triangle,non_negativity\n");
    let mut details = String::new();
    for id in ids {
        let report = check_axioms(id, &samples, a.tolerance).map_err(|e| UsageError(e.to_string()))?;
        let cols: Vec<&str> = Axiom::ALL
            .iter()
            .map(|&ax| if report.outcome(ax).passed() { "pass" } else { "fail" })
            .collect();
        let _ = writeln!(table, "{},{},{}", id.code(), csv_text(id.name()), cols.join(","));
        for o in &report.outcomes {
            if let Some(c) = &o.counterexample {
                let _ = writeln!(details, "{} {}: {c}", id.code(), o.axiom);
            }
        }
    }
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(table.as_bytes())?;
    if !details.is_empty() {
        writeln!(stdout, "\n# first counterexamples")?;
        stdout.write_all(details.as_bytes())?;
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let config = BenchConfig::load(&a.config)?;
    if a.threads == Some(0) {
        bail!(UsageError("--threads must be positive".into()));
    }
    let s = bench::run_bench(&config, a.threads, a.fresh, a.quiet)?;
    println!("output_dir = \"{}\"", s.output_dir.display());
    println!("cells_total = {}", s.cells_total);
    println!("cells_skipped = {}", s.cells_skipped);
    println!("cells_run = {}", s.cells_run);
    println!("failed_cells = {}", s.failed_cells);
    for f in &s.files {
        println!("report = \"{}\"", f.name);
    }
    if s.failed_cells > 0 {
        eprintln!("warning: {} cell(s) failed; see matrix.csv", s.failed_cells);
    }
    Ok(())
}

fn cmd_rank(a: &RankArgs) -> Result<()> {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        bail!(UsageError(format!("alpha must lie in (0, 1), got {}", a.alpha)));
    }
    let mut matrix = read_matrix_csv(&a.matrix).with_context(|| format!("loading {}", a.matrix.display()))?;
    if let Some(ext) = &a.external {
        let rows = opf_core::dataio::read_external_baselines(ext)?;
        matrix = matrix.merge_external(&rows)?;
    }
    let summary = summarize(&matrix)?;
    let comparable = matrix.complete_subset();
    let stats = friedman_nemenyi(&comparable, a.alpha)?;
    let manifest = RunManifest {
        library_version: opf_core::VERSION.to_string(),
        archive_format_version: FORMAT_VERSION,
        runs: matrix.runs(),
        alpha: a.alpha,
        distances: matrix.classifiers().to_vec(),
        datasets: matrix
            .datasets()
            .iter()
            .map(|d| opf_core::dataio::ManifestDataset {
                name: d.clone(),
                ..Default::default()
            })
            .collect(),
        external_baselines: a.external.as_ref().map(|p| p.display().to_string()),
        ..Default::default()
    };
    let files = write_reports(&summary, Some(&stats), &manifest, &a.output_dir)?;
    println!("classifiers = {}", stats.classifiers.len());
    println!("blocks = {}", stats.friedman.n_blocks);
    println!("friedman_statistic = {:?}", stats.friedman.statistic);
    println!("friedman_p_value = {:?}", stats.friedman.p_value);
    println!("critical_difference = {:?}", stats.nemenyi.critical_difference);
    for f in &files {
        println!("report = \"{}\"", f.name);
    }
    Ok(())
}
