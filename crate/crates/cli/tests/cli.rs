//! End-to-end runs of the `opf` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use opf_core::dataio::load_forest;

fn opf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opf"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, content).unwrap();
    p.display().to_string()
}

const LINE: &str = "x,class\n0,A\n1,A\n3,B\n4,B\n";

#[test]
fn train_then_predict_the_training_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "line.csv", LINE);
    let model = dir.path().join("m.opf").display().to_string();
    let o = opf(&["train", "--data", &data, "--distance", "D3", "--model-out", &model]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("prototypes = 2"));
    assert!(stdout(&o).contains("samples = 4"));

    let archive = load_forest(Path::new(&model)).unwrap();
    assert_eq!(archive.forest.prototypes(), &[1, 2]);
    assert_eq!(archive.forest.costs(), &[1.0, 0.0, 0.0, 1.0]);
    assert_eq!(
        archive.class_names.as_deref(),
        Some(&["A".to_string(), "B".to_string()][..])
    );

    let out = dir.path().join("pred.csv").display().to_string();
    let o = opf(&["predict", "--model", &model, "--data", &data, "--out", &out]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("accuracy = 1.0"));
    let pred = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = pred.lines().collect();
    assert_eq!(lines[0], "row,label,cost,conqueror");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0,A,"));
    assert!(lines[4].starts_with("3,B,"));
}

#[test]
fn predict_unlabeled_query_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "line.csv", LINE);
    let model = dir.path().join("m.opf").display().to_string();
    assert!(opf(&[
        "train",
        "--data",
        &data,
        "--distance",
        "euclidean",
        "--model-out",
        &model
    ])
    .status
    .success());

    let q = write(dir.path(), "q.csv", "4.0\n");
    let out = dir.path().join("p.csv").display().to_string();
    let o = opf(&[
        "predict",
        "--model",
        &model,
        "--data",
        &q,
        "--no-header",
        "--unlabeled",
        "--out",
        &out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().nth(1), Some("0,B,1.0,2"));
    assert!(!stdout(&o).contains("accuracy"));

    let wide = write(dir.path(), "wide.csv", "1,2,3\n");
    let o = opf(&[
        "predict",
        "--model",
        &model,
        "--data",
        &wide,
        "--no-header",
        "--unlabeled",
        "--out",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("dimension mismatch"));

    let empty = write(dir.path(), "empty.csv", "");
    let o = opf(&[
        "predict",
        "--model",
        &model,
        "--data",
        &empty,
        "--no-header",
        "--out",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(&out).unwrap(), "row,label,cost,conqueror\n");

    let mut bytes = fs::read(&model).unwrap();
    bytes[8] = 9;
    let bad = dir.path().join("bad.opf");
    fs::write(&bad, bytes).unwrap();
    let o = opf(&[
        "predict",
        "--model",
        bad.to_str().unwrap(),
        "--data",
        &data,
        "--out",
        &out,
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("version 9"));
}

#[test]
fn train_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "line.csv", LINE);
    let model = dir.path().join("m.opf").display().to_string();
    let o = opf(&["train", "--data", &data, "--distance", "D99", "--model-out", &model]);
    assert_eq!(o.status.code(), Some(2));
    let single = write(dir.path(), "one.csv", "x,c\n1,A\n2,A\n");
    let o = opf(&["train", "--data", &single, "--distance", "D3", "--model-out", &model]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("SingleClass"));
    let o = opf(&[
        "train",
        "--data",
        "/nonexistent.csv",
        "--distance",
        "D3",
        "--model-out",
        &model,
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = opf(&["train", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn axioms_command() {
    let o = opf(&["axioms", "--distance", "D3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row = text.lines().find(|l| l.starts_with("D3,")).unwrap();
    assert_eq!(row.matches("pass").count(), 4, "{row}");

    let text = stdout(&opf(&["axioms", "--distance", "D4"]));
    assert!(text.contains("d(x0,x0)=1"), "{text}");

    let text = stdout(&opf(&["axioms"]));
    let rows = text.lines().take_while(|l| !l.is_empty()).skip(1).count();
    assert_eq!(rows, 47);

    assert_eq!(opf(&["axioms", "--distance", "D0"]).status.code(), Some(2));
}

#[test]
fn version_names_the_archive_format() {
    let o = opf(&["--version"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("archive format 1"));
}

fn tiny_dataset(dir: &Path) {
    let mut s = String::from("a,b,label\n");
    for i in 0..12 {
        let c = i % 2;
        s.push_str(&format!(
            "{},{},{}\n",
            c as f64 * 5.0 + i as f64 * 0.1,
            1.0 + (i % 3) as f64,
            ["p", "q"][c]
        ));
    }
    fs::write(dir.join("tiny.csv"), s).unwrap();
}

fn config(dir: &Path, distances: &str, runs: usize) -> String {
    write(
        dir,
        "bench.toml",
        &format!(
            "distances = {distances}\nruns = {runs}\nseed = 3\noutput_dir = \"out\"\n\n\
             [[datasets]]\nname = \"tiny\"\npath = \"tiny.csv\"\n"
        ),
    )
}

/// Every output except the ones that record wall-clock time.
fn report_bytes(out: &Path) -> Vec<(String, String)> {
    let mut files: Vec<_> = fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            let n = p.file_name().unwrap().to_str().unwrap();
            !matches!(n, "timings.csv" | "run_log.toml" | "cells.journal")
        })
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read_to_string(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn bench_two_distances_is_eight_cells_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    tiny_dataset(dir.path());
    let cfg = config(dir.path(), "[\"D3\", \"D6\"]", 2);
    let o = opf(&["bench", &cfg, "-q"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("cells_total = 8"));
    assert!(text.contains("cells_run = 8"));
    let out = dir.path().join("out");
    for f in [
        "matrix.csv",
        "summary_table.csv",
        "summary_raw.csv",
        "manifest.toml",
        "cells.journal",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    let first = report_bytes(&out);

    let o = opf(&["bench", &cfg, "-q"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("cells_skipped = 8"));
    assert!(stdout(&o).contains("cells_run = 0"));
    assert_eq!(report_bytes(&out), first);
    let log = fs::read_to_string(out.join("run_log.toml")).unwrap();
    assert!(log.contains("cells_skipped = 8"), "{log}");

    let o = opf(&["bench", &cfg, "-q", "--fresh", "--threads", "1"]);
    assert!(stdout(&o).contains("cells_run = 8"));
    assert_eq!(report_bytes(&out), first);
}

#[test]
fn bench_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    tiny_dataset(dir.path());
    let cfg = config(dir.path(), "[\"D3\"]", 0);
    assert_eq!(opf(&["bench", &cfg]).status.code(), Some(2));
    let cfg = config(dir.path(), "[\"D3\", \"D3\"]", 2);
    assert_eq!(opf(&["bench", &cfg]).status.code(), Some(2));
    let cfg = config(dir.path(), "[]", 2);
    assert_eq!(opf(&["bench", &cfg]).status.code(), Some(2));
    let bad = write(dir.path(), "bad.toml", "runs = 2\nunknown_key = 1\n");
    assert_eq!(opf(&["bench", &bad]).status.code(), Some(2));
}

#[test]
fn rank_recomputes_statistics_from_the_matrix() {
    let dir = tempfile::tempdir().unwrap();
    tiny_dataset(dir.path());
    let cfg = config(dir.path(), "[\"D3\", \"D6\", \"D1\"]", 5);
    assert!(opf(&["bench", &cfg, "-q"]).status.success());
    let out = dir.path().join("out");
    let ranked = dir.path().join("ranked");
    let o = opf(&[
        "rank",
        "--matrix",
        out.join("matrix.csv").to_str().unwrap(),
        "--output-dir",
        ranked.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("blocks = 5"));
    for f in ["ranks.csv", "friedman.csv", "nemenyi_pairs.csv", "wilcoxon_grid.csv"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(ranked.join(f)).unwrap(), "{f}");
    }

    let ext = write(
        dir.path(),
        "ext.csv",
        "dataset,classifier,run,accuracy\ntiny,SVM,0,0.9\n",
    );
    let o = opf(&[
        "rank",
        "--matrix",
        out.join("matrix.csv").to_str().unwrap(),
        "--external",
        &ext,
        "--output-dir",
        ranked.to_str().unwrap(),
    ]);
    // SVM covers one run of five: it is listed but left out of the ranking
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("classifiers = 3"));
    let table = fs::read_to_string(ranked.join("summary_table.csv")).unwrap();
    assert!(table.lines().next().unwrap().ends_with(",SVM"));

    assert_eq!(
        opf(&["rank", "--matrix", "x.csv", "--alpha", "1.5", "--output-dir", "y"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn checked_in_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let full = opf_cli::BenchConfig::load(&root.join("full_protocol.toml")).unwrap();
    assert_eq!(full.datasets.len(), 22);
    assert_eq!(full.distances.len(), 47);
    assert_eq!(full.runs, 25);
    // 22 x 47 x 25 x 2 cells
    assert_eq!(full.datasets.len() * full.distances.len() * full.runs * 2, 51_700);
    let desk = opf_cli::BenchConfig::load(&root.join("desk.toml")).unwrap();
    assert_eq!(desk.datasets.len(), 2);
}
