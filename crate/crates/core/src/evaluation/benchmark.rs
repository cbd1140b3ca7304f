use std::time::Instant;

use rayon::prelude::*;

use crate::dataio::{fit_normalization, Dataset, ExternalRow, NormalizationMode};
use crate::distances::DistanceId;
use crate::forest::{train_with, Label, Sample, TrainOptions, TrainingGraph};

use super::metrics::Metric;
use super::split::{make_splits, SplitPlan};
use super::EvalError;

/// Folds per run. Each run yields two cells: train on fold 0 and test on
/// fold 1, then the reverse.
pub const FOLDS: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Ok(f64),
    Failed(String),
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Ok(v) => Some(*v),
            Cell::Failed(_) => None,
        }
    }
}

/// Address of one grid cell. `fold` is the training fold; the other one is
/// tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub dataset: usize,
    pub classifier: usize,
    pub run: usize,
    pub fold: usize,
}

/// Scores indexed by (dataset, classifier, run, fold).
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkMatrix {
    datasets: Vec<String>,
    classifiers: Vec<String>,
    runs: usize,
    cells: Vec<Cell>,
}

impl BenchmarkMatrix {
    /// A grid with every cell marked as not yet run.
    pub fn new(datasets: Vec<String>, classifiers: Vec<String>, runs: usize) -> Self {
        let len = datasets.len() * classifiers.len() * runs * FOLDS;
        BenchmarkMatrix {
            datasets,
            classifiers,
            runs,
            cells: vec![Cell::Failed("not run".into()); len],
        }
    }

    pub fn datasets(&self) -> &[String] {
        &self.datasets
    }

    pub fn classifiers(&self) -> &[String] {
        &self.classifiers
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn index(&self, key: CellKey) -> usize {
        assert!(
            key.dataset < self.datasets.len()
                && key.classifier < self.classifiers.len()
                && key.run < self.runs
                && key.fold < FOLDS,
            "cell {key:?} outside the grid"
        );
        ((key.dataset * self.classifiers.len() + key.classifier) * self.runs + key.run) * FOLDS + key.fold
    }

    pub fn cell(&self, key: CellKey) -> &Cell {
        &self.cells[self.index(key)]
    }

    pub fn get(&self, dataset: usize, classifier: usize, run: usize, fold: usize) -> &Cell {
        self.cell(CellKey {
            dataset,
            classifier,
            run,
            fold,
        })
    }

    pub fn set(&mut self, key: CellKey, cell: Cell) {
        let i = self.index(key);
        self.cells[i] = cell;
    }

    /// All keys in storage order: dataset, classifier, run, fold.
    pub fn keys(&self) -> impl Iterator<Item = CellKey> + '_ {
        let (nd, nc, nr) = (self.datasets.len(), self.classifiers.len(), self.runs);
        (0..nd).flat_map(move |dataset| {
            (0..nc).flat_map(move |classifier| {
                (0..nr).flat_map(move |run| {
                    (0..FOLDS).map(move |fold| CellKey {
                        dataset,
                        classifier,
                        run,
                        fold,
                    })
                })
            })
        })
    }

    /// Run score: the mean of the two fold orientations.
    pub fn run_score(&self, dataset: usize, classifier: usize, run: usize) -> Option<f64> {
        let a = self.get(dataset, classifier, run, 0).value()?;
        let b = self.get(dataset, classifier, run, 1).value()?;
        Some((a + b) / 2.0)
    }

    pub fn run_scores(&self, dataset: usize, classifier: usize) -> Option<Vec<f64>> {
        (0..self.runs).map(|r| self.run_score(dataset, classifier, r)).collect()
    }

    pub fn failures(&self) -> Vec<(CellKey, &str)> {
        self.keys()
            .zip(&self.cells)
            .filter_map(|(k, c)| match c {
                Cell::Failed(msg) => Some((k, msg.as_str())),
                Cell::Ok(_) => None,
            })
            .collect()
    }

    pub fn is_complete(&self, classifier: usize) -> bool {
        self.keys()
            .zip(&self.cells)
            .all(|(k, c)| k.classifier != classifier || matches!(c, Cell::Ok(_)))
    }

    /// The matrix restricted to classifiers without failed cells.
    pub fn complete_subset(&self) -> BenchmarkMatrix {
        let keep: Vec<usize> = (0..self.classifiers.len()).filter(|&c| self.is_complete(c)).collect();
        let mut out = BenchmarkMatrix::new(
            self.datasets.clone(),
            keep.iter().map(|&c| self.classifiers[c].clone()).collect(),
            self.runs,
        );
        for d in 0..self.datasets.len() {
            for (new_c, &c) in keep.iter().enumerate() {
                for r in 0..self.runs {
                    for f in 0..FOLDS {
                        let key = CellKey {
                            dataset: d,
                            classifier: new_c,
                            run: r,
                            fold: f,
                        };
                        out.set(key, self.get(d, c, r, f).clone());
                    }
                }
            }
        }
        out
    }

    /// Appends externally computed classifiers as new columns, in order of
    /// first appearance. A row without a fold fills both folds of its run.
    /// Uncovered cells are marked failed.
    pub fn merge_external(&self, rows: &[ExternalRow]) -> Result<BenchmarkMatrix, EvalError> {
        let mut names: Vec<String> = Vec::new();
        for row in rows {
            if self.classifiers.contains(&row.classifier) {
                return Err(EvalError::Invalid(format!(
                    "external classifier `{}` clashes with an existing column",
                    row.classifier
                )));
            }
            if !names.contains(&row.classifier) {
                names.push(row.classifier.clone());
            }
        }
        let mut classifiers = self.classifiers.clone();
        classifiers.extend(names.iter().cloned());
        let mut out = BenchmarkMatrix::new(self.datasets.clone(), classifiers, self.runs);
        for key in self.keys() {
            out.set(key, self.cell(key).clone());
        }
        let base = self.classifiers.len();
        for key in out.keys().filter(|k| k.classifier >= base).collect::<Vec<_>>() {
            out.set(key, Cell::Failed("missing external value".into()));
        }
        for row in rows {
            let dataset =
                self.datasets.iter().position(|d| *d == row.dataset).ok_or_else(|| {
                    EvalError::Invalid(format!("external row names unknown dataset `{}`", row.dataset))
                })?;
            if row.run >= self.runs {
                return Err(EvalError::Invalid(format!(
                    "external row run {} is outside 0..{}",
                    row.run, self.runs
                )));
            }
            let classifier = base
                + names
                    .iter()
                    .position(|n| *n == row.classifier)
                    .expect("collected above");
            let folds = match row.fold {
                Some(f) if f < FOLDS => f..f + 1,
                Some(f) => return Err(EvalError::Invalid(format!("external row fold {f} is not 0 or 1"))),
                None => 0..FOLDS,
            };
            for fold in folds {
                out.set(
                    CellKey {
                        dataset,
                        classifier,
                        run: row.run,
                        fold,
                    },
                    Cell::Ok(row.accuracy),
                );
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SummaryCell {
    Ok { mean: f64, std: f64 },
    Failed(String),
}

/// Mean and sample standard deviation (n − 1; 0 for a single run) of run
/// scores per (dataset, classifier).
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub datasets: Vec<String>,
    pub classifiers: Vec<String>,
    pub runs: usize,
    cells: Vec<SummaryCell>,
}

impl Summary {
    pub fn get(&self, dataset: usize, classifier: usize) -> &SummaryCell {
        &self.cells[dataset * self.classifiers.len() + classifier]
    }

    pub fn mean(&self, dataset: usize, classifier: usize) -> Option<f64> {
        match self.get(dataset, classifier) {
            SummaryCell::Ok { mean, .. } => Some(*mean),
            SummaryCell::Failed(_) => None,
        }
    }
}

pub fn summarize(matrix: &BenchmarkMatrix) -> Result<Summary, EvalError> {
    if matrix.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut cells = Vec::with_capacity(matrix.datasets.len() * matrix.classifiers.len());
    for d in 0..matrix.datasets.len() {
        for c in 0..matrix.classifiers.len() {
            cells.push(match matrix.run_scores(d, c) {
                Some(scores) => {
                    let n = scores.len() as f64;
                    let mean = scores.iter().sum::<f64>() / n;
                    let std = if scores.len() > 1 {
                        (scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
                    } else {
                        0.0
                    };
                    SummaryCell::Ok { mean, std }
                }
                None => {
                    let first = (0..matrix.runs)
                        .flat_map(|r| (0..FOLDS).map(move |f| (r, f)))
                        .find_map(|(r, f)| match matrix.get(d, c, r, f) {
                            Cell::Failed(m) => Some(m.clone()),
                            Cell::Ok(_) => None,
                        })
                        .unwrap_or_default();
                    SummaryCell::Failed(first)
                }
            });
        }
    }
    Ok(Summary {
        datasets: matrix.datasets.clone(),
        classifiers: matrix.classifiers.clone(),
        runs: matrix.runs,
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BenchOptions {
    /// Fitted on each training fold, then applied to both folds.
    pub normalization: NormalizationMode,
    pub metric: Metric,
    /// Worker threads; `None` uses every available core.
    pub threads: Option<usize>,
    pub cache_distances: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub key: CellKey,
    pub cell: Cell,
    /// Wall-clock seconds for training plus testing.
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct BenchmarkOutput {
    pub matrix: BenchmarkMatrix,
    /// Per-cell results in storage order, including timings.
    pub results: Vec<CellResult>,
}

/// Datasets, distances and splits of a benchmark, ready to run cell by cell.
#[derive(Debug, Clone)]
pub struct BenchmarkPlan {
    datasets: Vec<Dataset>,
    distances: Vec<DistanceId>,
    seed: u64,
    runs: usize,
    options: BenchOptions,
    splits: Vec<Result<Vec<SplitPlan>, EvalError>>,
}

impl BenchmarkPlan {
    /// Datasets that cannot be split are kept; their cells fail with the
    /// split error.
    pub fn new(
        datasets: Vec<Dataset>,
        distances: Vec<DistanceId>,
        seed: u64,
        runs: usize,
        options: BenchOptions,
    ) -> Result<Self, EvalError> {
        if runs == 0 {
            return Err(EvalError::NoRuns);
        }
        if datasets.is_empty() || distances.is_empty() {
            return Err(EvalError::Empty);
        }
        let splits = datasets.iter().map(|d| make_splits(d, seed, runs)).collect();
        Ok(BenchmarkPlan {
            datasets,
            distances,
            seed,
            runs,
            options,
            splits,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn options(&self) -> BenchOptions {
        self.options
    }

    pub fn empty_matrix(&self) -> BenchmarkMatrix {
        BenchmarkMatrix::new(
            self.datasets.iter().map(|d| d.name().to_string()).collect(),
            self.distances.iter().map(|d| d.code().to_string()).collect(),
            self.runs,
        )
    }

    pub fn cells(&self) -> Vec<CellKey> {
        self.empty_matrix().keys().collect()
    }

    pub fn run_cell(&self, key: CellKey) -> CellResult {
        let start = Instant::now();
        let cell = match self.evaluate(key) {
            Ok(v) => Cell::Ok(v),
            Err(msg) => Cell::Failed(msg),
        };
        CellResult {
            key,
            cell,
            seconds: start.elapsed().as_secs_f64(),
        }
    }

    fn evaluate(&self, key: CellKey) -> Result<f64, String> {
        let plans = self.splits[key.dataset].as_ref().map_err(|e| e.to_string())?;
        let plan = &plans[key.run];
        let samples = self.datasets[key.dataset].samples();
        let pick = |fold: usize| -> Vec<Sample> { plan.fold(fold as u8).iter().map(|&i| samples[i].clone()).collect() };
        let train_set = pick(key.fold);
        let test_set = pick(1 - key.fold);
        let spec = fit_normalization(&train_set, self.options.normalization).map_err(|e| e.to_string())?;
        let normalize = |set: Vec<Sample>| -> Result<Vec<Sample>, String> {
            if spec.is_identity() {
                return Ok(set);
            }
            set.iter()
                .map(|s| spec.apply_sample(s).map_err(|e| e.to_string()))
                .collect()
        };
        let train_set = normalize(train_set)?;
        let test_set = normalize(test_set)?;
        let graph = TrainingGraph::new(train_set, self.distances[key.classifier]).map_err(|e| e.to_string())?;
        let forest = train_with(
            &graph,
            TrainOptions {
                cache_distances: self.options.cache_distances,
            },
        )
        .map_err(|e| e.to_string())?;
        let mut predicted = Vec::with_capacity(test_set.len());
        for s in &test_set {
            predicted.push(forest.classify(&s.features).map_err(|e| e.to_string())?.label);
        }
        let truth: Vec<Label> = test_set.iter().map(|s| s.label).collect();
        self.options.metric.score(&predicted, &truth).map_err(|e| e.to_string())
    }

    /// Runs `keys` in parallel. `on_done` sees each result as it completes
    /// (in completion order); the returned vector follows `keys`.
    pub fn run_cells<F>(&self, keys: &[CellKey], on_done: F) -> Vec<CellResult>
    where
        F: Fn(&CellResult) + Sync,
    {
        let work = || {
            keys.par_iter()
                .map(|&k| {
                    let r = self.run_cell(k);
                    on_done(&r);
                    r
                })
                .collect()
        };
        match self.options.threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map(|pool| pool.install(work))
                .unwrap_or_else(|_| work()),
            None => work(),
        }
    }

    /// Builds the matrix from results; keys without a result stay failed.
    pub fn assemble(&self, results: &[CellResult]) -> BenchmarkMatrix {
        let mut m = self.empty_matrix();
        for r in results {
            m.set(r.key, r.cell.clone());
        }
        m
    }

    pub fn run(&self) -> BenchmarkOutput {
        let results = self.run_cells(&self.cells(), |_| {});
        BenchmarkOutput {
            matrix: self.assemble(&results),
            results,
        }
    }
}

/// Runs the full grid with default options (plain accuracy, no
/// normalization, all cores).
pub fn run_benchmark(
    datasets: &[Dataset],
    distances: &[DistanceId],
    seed: u64,
    runs: usize,
) -> Result<BenchmarkMatrix, EvalError> {
    run_benchmark_with(datasets, distances, seed, runs, BenchOptions::default()).map(|o| o.matrix)
}

pub fn run_benchmark_with(
    datasets: &[Dataset],
    distances: &[DistanceId],
    seed: u64,
    runs: usize,
    options: BenchOptions,
) -> Result<BenchmarkOutput, EvalError> {
    let plan = BenchmarkPlan::new(datasets.to_vec(), distances.to_vec(), seed, runs, options)?;
    Ok(plan.run())
}
