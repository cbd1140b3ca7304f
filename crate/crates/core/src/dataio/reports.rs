use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::evaluation::{StatReport, Summary, SummaryCell, WilcoxonOutcome};

use super::csv_io::csv_field;
use super::{fmt_exact, DataError};

/// Identifying metadata of a benchmark run, written as `manifest.toml`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunManifest {
    pub library_version: String,
    pub archive_format_version: u32,
    pub seed: u64,
    pub runs: usize,
    pub normalization: String,
    pub metric: String,
    pub alpha: f64,
    pub distances: Vec<String>,
    pub datasets: Vec<ManifestDataset>,
    pub external_baselines: Option<String>,
    /// Digest of everything above that determines cell values.
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ManifestDataset {
    pub name: String,
    pub path: String,
    pub format: String,
    pub samples: usize,
    pub features: usize,
    pub classes: usize,
    /// SHA-256 of the source file.
    pub sha256: String,
}

fn toml_str(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl RunManifest {
    pub fn to_toml(&self) -> String {
        let mut s = String::new();
        let list = |v: &[String]| v.iter().map(|x| toml_str(x)).collect::<Vec<_>>().join(", ");
        let _ = writeln!(s, "library_version = {}", toml_str(&self.library_version));
        let _ = writeln!(s, "archive_format_version = {}", self.archive_format_version);
        let _ = writeln!(s, "config_hash = {}", toml_str(&self.config_hash));
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "runs = {}", self.runs);
        let _ = writeln!(s, "normalization = {}", toml_str(&self.normalization));
        let _ = writeln!(s, "metric = {}", toml_str(&self.metric));
        let _ = writeln!(s, "alpha = {}", fmt_exact(self.alpha));
        let _ = writeln!(s, "distances = [{}]", list(&self.distances));
        if let Some(ext) = &self.external_baselines {
            let _ = writeln!(s, "external_baselines = {}", toml_str(ext));
        }
        for d in &self.datasets {
            let _ = writeln!(s, "\n[[datasets]]");
            let _ = writeln!(s, "name = {}", toml_str(&d.name));
            let _ = writeln!(s, "path = {}", toml_str(&d.path));
            let _ = writeln!(s, "format = {}", toml_str(&d.format));
            let _ = writeln!(s, "samples = {}", d.samples);
            let _ = writeln!(s, "features = {}", d.features);
            let _ = writeln!(s, "classes = {}", d.classes);
            let _ = writeln!(s, "sha256 = {}", toml_str(&d.sha256));
        }
        s
    }
}

/// A written report file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFile {
    pub name: String,
    pub path: PathBuf,
    pub bytes: usize,
    pub sha256: String,
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Writes `contents` via a temporary file and rename, so an interrupted run
/// never leaves a half-written report.
pub(crate) fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<ReportFile, DataError> {
    let path = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(|e| DataError::io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| DataError::io(&path, e))?;
    Ok(ReportFile {
        name: name.to_string(),
        path,
        bytes: contents.len(),
        sha256: hex(&Sha256::digest(contents.as_bytes())),
    })
}

fn summary_table(summary: &Summary) -> String {
    let mut s = String::from("dataset");
    for c in &summary.classifiers {
        s.push(',');
        s.push_str(&csv_field(c));
    }
    s.push('\n');
    for (d, name) in summary.datasets.iter().enumerate() {
        s.push_str(&csv_field(name));
        for c in 0..summary.classifiers.len() {
            match summary.get(d, c) {
                SummaryCell::Ok { mean, std } => {
                    let _ = write!(s, ",{mean:.4} ± {std:.4}");
                }
                SummaryCell::Failed(_) => s.push_str(",failed"),
            }
        }
        s.push('\n');
    }
    s
}

fn summary_raw(summary: &Summary) -> String {
    let mut s = String::from("dataset,classifier,mean,std,error\n");
    for (d, name) in summary.datasets.iter().enumerate() {
        for (c, classifier) in summary.classifiers.iter().enumerate() {
            let (mean, std, err) = match summary.get(d, c) {
                SummaryCell::Ok { mean, std } => (fmt_exact(*mean), fmt_exact(*std), String::new()),
                SummaryCell::Failed(m) => (String::new(), String::new(), csv_field(m)),
            };
            let _ = writeln!(s, "{},{},{mean},{std},{err}", csv_field(name), csv_field(classifier));
        }
    }
    s
}

fn wilcoxon_pairs(stats: &StatReport) -> String {
    let mut s =
        String::from("dataset,classifier_a,classifier_b,n_used,w_plus,w_minus,statistic,p_value,method,equivalent\n");
    for e in &stats.wilcoxon {
        let (n, wp, wm, method) = match &e.outcome {
            WilcoxonOutcome::Tested(r) => (
                r.n_used.to_string(),
                fmt_exact(r.w_plus),
                fmt_exact(r.w_minus),
                if r.exact { "exact" } else { "normal" }.to_string(),
            ),
            WilcoxonOutcome::AllZero => ("0".into(), "0.0".into(), "0.0".into(), "all_zero".into()),
            WilcoxonOutcome::Untestable(m) => (String::new(), String::new(), String::new(), csv_field(m)),
        };
        let opt = |v: Option<f64>| v.map(fmt_exact).unwrap_or_default();
        let eq = e.outcome.equivalent().map(|b| b.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{n},{wp},{wm},{},{},{method},{eq}",
            csv_field(&stats.datasets[e.dataset]),
            csv_field(&stats.classifiers[e.first]),
            csv_field(&stats.classifiers[e.second]),
            opt(e.outcome.statistic()),
            opt(e.outcome.p_value()),
        );
    }
    s
}

/// Per dataset, marks the classifier with the best mean and every classifier
/// the Wilcoxon test cannot tell apart from it.
fn wilcoxon_grid(summary: &Summary, stats: &StatReport) -> String {
    let mut s = String::from("dataset");
    for c in &stats.classifiers {
        s.push(',');
        s.push_str(&csv_field(c));
    }
    s.push('\n');
    for (d, name) in stats.datasets.iter().enumerate() {
        let sd = summary.datasets.iter().position(|x| x == name);
        let mean = |c: usize| {
            let sc = summary.classifiers.iter().position(|x| *x == stats.classifiers[c])?;
            summary.mean(sd?, sc)
        };
        let best = (0..stats.classifiers.len())
            .filter_map(|c| mean(c).map(|m| (c, m)))
            .fold(None::<(usize, f64)>, |acc, (c, m)| match acc {
                Some((_, bm)) if bm >= m => acc,
                _ => Some((c, m)),
            });
        s.push_str(&csv_field(name));
        for c in 0..stats.classifiers.len() {
            let mark = match best {
                Some((b, _)) if b == c => "best",
                Some((b, _)) => match stats.wilcoxon_for(d, b, c).and_then(|e| e.outcome.equivalent()) {
                    Some(true) => "equivalent",
                    Some(false) => "different",
                    None => "n/a",
                },
                None => "n/a",
            };
            s.push(',');
            s.push_str(mark);
        }
        s.push('\n');
    }
    s
}

fn ranks(stats: &StatReport) -> String {
    let mut order: Vec<usize> = (0..stats.classifiers.len()).collect();
    let r = &stats.friedman.mean_ranks;
    order.sort_by(|&a, &b| r[b].total_cmp(&r[a]).then(a.cmp(&b)));
    let mut s = String::from("classifier,mean_rank,cd\n");
    for c in order {
        let _ = writeln!(
            s,
            "{},{},{}",
            csv_field(&stats.classifiers[c]),
            fmt_exact(r[c]),
            fmt_exact(stats.nemenyi.critical_difference)
        );
    }
    s
}

fn friedman(stats: &StatReport) -> String {
    format!(
        "statistic,p_value,k,n_blocks,alpha,q,critical_difference\n{},{},{},{},{},{},{}\n",
        fmt_exact(stats.friedman.statistic),
        fmt_exact(stats.friedman.p_value),
        stats.classifiers.len(),
        stats.friedman.n_blocks,
        fmt_exact(stats.alpha),
        fmt_exact(stats.nemenyi.q),
        fmt_exact(stats.nemenyi.critical_difference),
    )
}

fn nemenyi_pairs(stats: &StatReport) -> String {
    let mut s = String::from("classifier_a,classifier_b,rank_difference,significant\n");
    for p in &stats.nemenyi.pairs {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            csv_field(&stats.classifiers[p.first]),
            csv_field(&stats.classifiers[p.second]),
            fmt_exact(p.rank_difference),
            p.significant
        );
    }
    s
}

/// Writes the report set into `out_dir`, which is created if needed. The
/// statistics files are skipped when `stats` is `None` (fewer than three
/// comparable classifiers). Identical inputs give byte-identical files.
pub fn write_reports(
    summary: &Summary,
    stats: Option<&StatReport>,
    manifest: &RunManifest,
    out_dir: &Path,
) -> Result<Vec<ReportFile>, DataError> {
    if summary.datasets.is_empty() || summary.classifiers.is_empty() {
        return Err(DataError::Invalid("empty summary".into()));
    }
    fs::create_dir_all(out_dir).map_err(|e| DataError::io(out_dir, e))?;
    let mut files = vec![
        write_atomic(out_dir, "summary_table.csv", &summary_table(summary))?,
        write_atomic(out_dir, "summary_raw.csv", &summary_raw(summary))?,
    ];
    if let Some(stats) = stats {
        files.push(write_atomic(out_dir, "wilcoxon_pairs.csv", &wilcoxon_pairs(stats))?);
        files.push(write_atomic(
            out_dir,
            "wilcoxon_grid.csv",
            &wilcoxon_grid(summary, stats),
        )?);
        files.push(write_atomic(out_dir, "ranks.csv", &ranks(stats))?);
        files.push(write_atomic(out_dir, "friedman.csv", &friedman(stats))?);
        files.push(write_atomic(out_dir, "nemenyi_pairs.csv", &nemenyi_pairs(stats))?);
    }
    files.push(write_atomic(out_dir, "manifest.toml", &manifest.to_toml())?);
    Ok(files)
}
