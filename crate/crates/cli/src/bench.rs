//! `bench`: runs the configured grid with a resumable cell journal and
//! writes the report set.
//!
//! Every finished cell is appended to `cells.journal` in the output
//! directory, headed by a hash of everything that determines cell values.
//! A later run with the same hash skips the journalled cells.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use opf_core::dataio::{
    read_external_baselines, write_matrix_csv, write_reports, Dataset, ManifestDataset, ReportFile, RunManifest,
    FORMAT_VERSION,
};
use opf_core::evaluation::{
    friedman_nemenyi, summarize, BenchOptions, BenchmarkMatrix, BenchmarkPlan, Cell, CellKey, CellResult,
};

use crate::config::BenchConfig;
use crate::{hex, load_dataset};

const JOURNAL: &str = "cells.journal";
const JOURNAL_TAG: &str = "# opf-bench journal v1";

/// Outcome of a bench invocation.
#[derive(Debug, Clone)]
pub struct BenchSummary {
    pub output_dir: PathBuf,
    pub cells_total: usize,
    pub cells_skipped: usize,
    pub cells_run: usize,
    pub failed_cells: usize,
    pub files: Vec<ReportFile>,
    pub config_hash: String,
}

struct Loaded {
    datasets: Vec<Dataset>,
    hashes: Vec<String>,
}

fn load_all(config: &BenchConfig) -> Result<Loaded> {
    let mut datasets = Vec::new();
    let mut hashes = Vec::new();
    for spec in &config.datasets {
        let bytes = fs::read(&spec.resolved).with_context(|| format!("reading {}", spec.resolved.display()))?;
        hashes.push(hex(&Sha256::digest(&bytes)));
        let ds = load_dataset(&spec.resolved, spec.format, &spec.label_column, spec.has_header)?;
        datasets.push(ds.with_name(spec.name.clone()));
    }
    Ok(Loaded { datasets, hashes })
}

/// Hash of the inputs that determine cell values.
fn cell_hash(config: &BenchConfig, hashes: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "seed={}", config.seed);
    let _ = writeln!(s, "runs={}", config.runs);
    let _ = writeln!(s, "normalization={}", config.normalization);
    let _ = writeln!(s, "metric={}", config.metric);
    let codes: Vec<String> = config.distances.iter().map(|d| d.code().to_string()).collect();
    let _ = writeln!(s, "distances={}", codes.join(","));
    for (d, h) in config.datasets.iter().zip(hashes) {
        let _ = writeln!(
            s,
            "dataset={}|{}|{}|{}|{}",
            d.name, d.format, d.label_column, d.has_header, h
        );
    }
    hex(&Sha256::digest(s.as_bytes()))
}

fn journal_line(r: &CellResult) -> String {
    let k = r.key;
    match &r.cell {
        Cell::Ok(v) => format!(
            "{} {} {} {} {:?} ok {:?}\n",
            k.dataset, k.classifier, k.run, k.fold, r.seconds, v
        ),
        Cell::Failed(m) => format!(
            "{} {} {} {} {:?} failed {}\n",
            k.dataset,
            k.classifier,
            k.run,
            k.fold,
            r.seconds,
            m.replace(['\n', '\r'], " ")
        ),
    }
}

fn parse_journal_line(line: &str) -> Option<CellResult> {
    let mut parts = line.splitn(7, ' ');
    let mut next_usize = || parts.next()?.parse::<usize>().ok();
    let key = CellKey {
        dataset: next_usize()?,
        classifier: next_usize()?,
        run: next_usize()?,
        fold: next_usize()?,
    };
    let seconds = parts.next()?.parse::<f64>().ok()?;
    let cell = match (parts.next()?, parts.next()) {
        ("ok", Some(v)) => Cell::Ok(v.parse::<f64>().ok()?),
        ("failed", msg) => Cell::Failed(msg.unwrap_or("").to_string()),
        _ => return None,
    };
    Some(CellResult { key, cell, seconds })
}

/// Reads the journal if it belongs to `hash`. Only newline-terminated lines
/// count, so a cell interrupted mid-write is simply re-run.
fn read_journal(path: &Path, hash: &str, matrix: &BenchmarkMatrix) -> Vec<CellResult> {
    let Ok(text) = fs::read_to_string(path) else {
        return Vec::new();
    };
    let mut lines = text.split_inclusive('\n');
    match lines.next() {
        Some(first) if first.trim_end() == format!("{JOURNAL_TAG} {hash}") => {}
        _ => return Vec::new(),
    }
    let valid = |k: &CellKey| {
        k.dataset < matrix.datasets().len()
            && k.classifier < matrix.classifiers().len()
            && k.run < matrix.runs()
            && k.fold < 2
    };
    let mut found: HashMap<CellKey, CellResult> = HashMap::new();
    for line in lines.filter(|l| l.ends_with('\n')) {
        if let Some(r) = parse_journal_line(line.trim_end_matches(['\n', '\r'])) {
            if valid(&r.key) {
                found.insert(r.key, r);
            }
        }
    }
    let mut out: Vec<CellResult> = found.into_values().collect();
    out.sort_by_key(|r| r.key);
    out
}

fn timings_csv(matrix: &BenchmarkMatrix, results: &[CellResult]) -> String {
    let mut s = String::from("dataset,classifier,run,fold,seconds\n");
    for r in results {
        let _ = writeln!(
            s,
            "{},{},{},{},{:?}",
            matrix.datasets()[r.key.dataset],
            matrix.classifiers()[r.key.classifier],
            r.key.run,
            r.key.fold,
            r.seconds
        );
    }
    s
}

/// Runs the benchmark described by `config`. `threads` overrides the
/// configured parallelism; `fresh` discards any existing journal.
pub fn run_bench(config: &BenchConfig, threads: Option<usize>, fresh: bool, quiet: bool) -> Result<BenchSummary> {
    let loaded = load_all(config)?;
    let hash = cell_hash(config, &loaded.hashes);
    let options = BenchOptions {
        normalization: config.normalization,
        metric: config.metric,
        threads: threads.or(config.parallelism),
        cache_distances: config.cache_distances,
    };
    let plan = BenchmarkPlan::new(
        loaded.datasets.clone(),
        config.distances.clone(),
        config.seed,
        config.runs,
        options,
    )?;
    let out = &config.output_dir;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;

    let journal_path = out.join(JOURNAL);
    let template = plan.empty_matrix();
    let previous = if fresh {
        Vec::new()
    } else {
        read_journal(&journal_path, &hash, &template)
    };
    let done: HashMap<CellKey, ()> = previous.iter().map(|r| (r.key, ())).collect();
    let todo: Vec<CellKey> = plan.cells().into_iter().filter(|k| !done.contains_key(k)).collect();
    let total = template.len();

    // Rewrite the journal with the header and the cells being kept.
    let mut header = format!("{JOURNAL_TAG} {hash}\n");
    for r in &previous {
        header.push_str(&journal_line(r));
    }
    fs::write(&journal_path, header).with_context(|| format!("writing {}", journal_path.display()))?;
    let journal = Mutex::new(
        OpenOptions::new()
            .append(true)
            .open(&journal_path)
            .with_context(|| format!("opening {}", journal_path.display()))?,
    );
    if !quiet && !previous.is_empty() {
        eprintln!("resuming: {} of {total} cells already in the journal", previous.len());
    }

    let counter = AtomicUsize::new(previous.len());
    let write_error: Mutex<Option<std::io::Error>> = Mutex::new(None);
    let fresh_results = plan.run_cells(&todo, |r| {
        let line = journal_line(r);
        {
            let mut file: std::sync::MutexGuard<'_, File> = journal.lock().expect("journal lock");
            if let Err(e) = file.write_all(line.as_bytes()).and_then(|_| file.flush()) {
                write_error.lock().expect("error lock").get_or_insert(e);
            }
        }
        let n = counter.fetch_add(1, Ordering::Relaxed) + 1;
        if !quiet {
            let k = r.key;
            let status = match &r.cell {
                Cell::Ok(v) => format!("{v:.4}"),
                Cell::Failed(m) => format!("failed: {m}"),
            };
            eprintln!(
                "[{n}/{total}] {} {} run {} fold {}: {status}",
                template.datasets()[k.dataset],
                template.classifiers()[k.classifier],
                k.run,
                k.fold
            );
        }
    });
    if let Some(e) = write_error.into_inner().expect("error lock") {
        return Err(e).context("appending to the cell journal");
    }

    let mut all = previous.clone();
    all.extend(fresh_results);
    all.sort_by_key(|r| r.key);
    let mut matrix = plan.assemble(&all);
    if let Some(ext) = &config.external_baselines {
        let rows = read_external_baselines(ext)?;
        matrix = matrix.merge_external(&rows)?;
    }
    let failed_cells = matrix.failures().len();

    write_matrix_csv(&matrix, &out.join("matrix.csv"))?;
    let summary = summarize(&matrix)?;
    let comparable = matrix.complete_subset();
    let stats = if comparable.classifiers().len() >= 3 {
        match friedman_nemenyi(&comparable, config.alpha) {
            Ok(s) => Some(s),
            Err(e) => {
                if !quiet {
                    eprintln!("warning: statistics skipped: {e}");
                }
                None
            }
        }
    } else {
        if !quiet {
            eprintln!(
                "warning: {} complete classifier(s); Friedman/Nemenyi needs at least 3",
                comparable.classifiers().len()
            );
        }
        None
    };
    let manifest = RunManifest {
        library_version: opf_core::VERSION.to_string(),
        archive_format_version: FORMAT_VERSION,
        seed: config.seed,
        runs: config.runs,
        normalization: config.normalization.to_string(),
        metric: config.metric.to_string(),
        alpha: config.alpha,
        distances: config.distances.iter().map(|d| d.code().to_string()).collect(),
        datasets: config
            .datasets
            .iter()
            .zip(&loaded.datasets)
            .zip(&loaded.hashes)
            .map(|((spec, ds), h)| ManifestDataset {
                name: spec.name.clone(),
                path: spec.path.clone(),
                format: spec.format.to_string(),
                samples: ds.len(),
                features: ds.n_features(),
                classes: ds.n_classes(),
                sha256: h.clone(),
            })
            .collect(),
        external_baselines: config.external_baselines.as_ref().map(|p| {
            p.file_name()
                .map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
        }),
        config_hash: hash.clone(),
    };
    let files = write_reports(&summary, stats.as_ref(), &manifest, out)?;

    // Scheduling-dependent outputs, kept apart from the reproducible set.
    fs::write(out.join("timings.csv"), timings_csv(&matrix, &all))?;
    let log = format!(
        "config_hash = \"{hash}\"\ncells_total = {total}\ncells_skipped = {}\ncells_run = {}\nfailed_cells = {failed_cells}\nthreads = \"{}\"\n",
        previous.len(),
        todo.len(),
        options.threads.map_or("auto".to_string(), |n| n.to_string()),
    );
    fs::write(out.join("run_log.toml"), log)?;

    Ok(BenchSummary {
        output_dir: out.clone(),
        cells_total: total,
        cells_skipped: previous.len(),
        cells_run: todo.len(),
        failed_cells,
        files,
        config_hash: hash,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn journal_lines_round_trip() {
        let r = CellResult {
            key: CellKey {
                dataset: 1,
                classifier: 46,
                run: 24,
                fold: 1,
            },
            cell: Cell::Ok(0.1 + 0.2),
            seconds: 0.125,
        };
        assert_eq!(parse_journal_line(journal_line(&r).trim_end()), Some(r));
        let f = CellResult {
            key: CellKey {
                dataset: 0,
                classifier: 0,
                run: 0,
                fold: 0,
            },
            cell: Cell::Failed("single class: two words".into()),
            seconds: 0.0,
        };
        assert_eq!(parse_journal_line(journal_line(&f).trim_end()), Some(f));
        assert_eq!(parse_journal_line("1 2 3"), None);
    }
}
