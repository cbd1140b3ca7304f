use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::evaluation::{BenchmarkMatrix, Cell, CellKey, FOLDS};

use super::csv_io::csv_field;
use super::{fmt_exact, DataError};

/// One externally computed score, e.g. from a third-party baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalRow {
    pub dataset: String,
    pub classifier: String,
    pub run: usize,
    /// `None` applies the score to both folds of the run.
    pub fold: Option<usize>,
    pub accuracy: f64,
}

const MATRIX_HEADER: &str = "dataset,classifier,run,fold,accuracy,error";

/// Long-format matrix: one row per cell in storage order. Failed cells have an
/// empty accuracy and the error text.
pub fn write_matrix_csv(matrix: &BenchmarkMatrix, path: &Path) -> Result<(), DataError> {
    let io = |e| DataError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    out.write_all(matrix_csv_bytes(matrix).as_bytes()).map_err(io)?;
    out.flush().map_err(io)
}

pub(crate) fn matrix_csv_bytes(matrix: &BenchmarkMatrix) -> String {
    let mut s = String::from(MATRIX_HEADER);
    s.push('\n');
    for key in matrix.keys() {
        let (acc, err) = match matrix.cell(key) {
            Cell::Ok(v) => (fmt_exact(*v), String::new()),
            Cell::Failed(m) => (String::new(), csv_field(m)),
        };
        s.push_str(&format!(
            "{},{},{},{},{acc},{err}\n",
            csv_field(&matrix.datasets()[key.dataset]),
            csv_field(&matrix.classifiers()[key.classifier]),
            key.run,
            key.fold
        ));
    }
    s
}

fn open_with_headers(path: &Path) -> Result<(csv::Reader<File>, Vec<String>), DataError> {
    let file = File::open(path).map_err(|e| DataError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| DataError::Parse {
            line: 1,
            column: 0,
            message: e.to_string(),
        })?
        .iter()
        .map(|h| h.to_ascii_lowercase())
        .collect();
    Ok((reader, headers))
}

fn column(headers: &[String], name: &str) -> Result<usize, DataError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| DataError::MissingLabelColumn(name.to_string()))
}

fn parse_index(token: &str, line: usize, column: usize) -> Result<usize, DataError> {
    token.parse().map_err(|_| DataError::Parse {
        line,
        column: column + 1,
        message: format!("expected a non-negative integer, found `{token}`"),
    })
}

fn parse_score(token: &str, line: usize, column: usize) -> Result<f64, DataError> {
    super::parse_feature(token, line, column + 1)
}

/// Reads a matrix written by [`write_matrix_csv`]. Dataset and classifier
/// order follow first appearance; absent cells are marked failed.
pub fn read_matrix_csv(path: &Path) -> Result<BenchmarkMatrix, DataError> {
    let (mut reader, headers) = open_with_headers(path)?;
    let cols = ["dataset", "classifier", "run", "fold", "accuracy"]
        .map(|n| column(&headers, n))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let error_col = headers.iter().position(|h| h == "error");

    let mut datasets: Vec<String> = Vec::new();
    let mut classifiers: Vec<String> = Vec::new();
    let mut entries = Vec::new();
    let mut runs = 0;
    for record in reader.records() {
        let record = record.map_err(|e| DataError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            column: 0,
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(i).unwrap_or("");
        let position = |names: &mut Vec<String>, name: &str| {
            names.iter().position(|n| n == name).unwrap_or_else(|| {
                names.push(name.to_string());
                names.len() - 1
            })
        };
        let dataset = position(&mut datasets, field(cols[0]));
        let classifier = position(&mut classifiers, field(cols[1]));
        let run = parse_index(field(cols[2]), line, cols[2])?;
        let fold = parse_index(field(cols[3]), line, cols[3])?;
        if fold >= FOLDS {
            return Err(DataError::Parse {
                line,
                column: cols[3] + 1,
                message: format!("fold {fold} is not 0 or 1"),
            });
        }
        let acc = field(cols[4]);
        let cell = if acc.is_empty() {
            Cell::Failed(error_col.map(|c| field(c).to_string()).unwrap_or_default())
        } else {
            Cell::Ok(parse_score(acc, line, cols[4])?)
        };
        runs = runs.max(run + 1);
        entries.push((
            CellKey {
                dataset,
                classifier,
                run,
                fold,
            },
            cell,
        ));
    }
    if entries.is_empty() {
        return Err(DataError::EmptyFile);
    }
    let mut matrix = BenchmarkMatrix::new(datasets, classifiers, runs);
    for key in matrix.keys().collect::<Vec<_>>() {
        matrix.set(key, Cell::Failed("missing from matrix file".into()));
    }
    for (key, cell) in entries {
        matrix.set(key, cell);
    }
    Ok(matrix)
}

/// Reads external baseline scores: columns `dataset`, `classifier`, `run`,
/// `accuracy` and optionally `fold`, matched by header name.
pub fn read_external_baselines(path: &Path) -> Result<Vec<ExternalRow>, DataError> {
    let (mut reader, headers) = open_with_headers(path)?;
    let dataset = column(&headers, "dataset")?;
    let classifier = column(&headers, "classifier")?;
    let run = column(&headers, "run")?;
    let accuracy = column(&headers, "accuracy")?;
    let fold = headers.iter().position(|h| h == "fold");
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| DataError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            column: 0,
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(i).unwrap_or("");
        let acc = parse_score(field(accuracy), line, accuracy)?;
        if !(0.0..=1.0).contains(&acc) {
            return Err(DataError::Parse {
                line,
                column: accuracy + 1,
                message: format!("accuracy {acc} is outside [0, 1]"),
            });
        }
        rows.push(ExternalRow {
            dataset: field(dataset).to_string(),
            classifier: field(classifier).to_string(),
            run: parse_index(field(run), line, run)?,
            fold: match fold.map(field) {
                None | Some("") => None,
                Some(t) => Some(parse_index(t, line, fold.unwrap_or(0))?),
            },
            accuracy: acc,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let mut m = BenchmarkMatrix::new(vec!["wine".into(), "a,b".into()], vec!["D1".into(), "D2".into()], 2);
        for (i, key) in m.keys().collect::<Vec<_>>().into_iter().enumerate() {
            let cell = if i == 3 {
                Cell::Failed("boom, \"quoted\"".into())
            } else {
                Cell::Ok(1.0 / (i + 3) as f64)
            };
            m.set(key, cell);
        }
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("matrix.csv");
        write_matrix_csv(&m, &p).unwrap();
        assert_eq!(read_matrix_csv(&p).unwrap(), m);
    }

    #[test]
    fn external_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ext.csv");
        std::fs::write(
            &p,
            "dataset,classifier,run,accuracy,fold\nwine,SVM,0,0.93,\nwine,SVM,1,0.91,1\n",
        )
        .unwrap();
        let rows = read_external_baselines(&p).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].fold, None);
        assert_eq!(rows[1].fold, Some(1));
        std::fs::write(&p, "dataset,classifier,run,accuracy\nwine,SVM,0,1.5\n").unwrap();
        assert!(read_external_baselines(&p).is_err());
        std::fs::write(&p, "dataset,run,accuracy\n").unwrap();
        assert!(matches!(
            read_external_baselines(&p),
            Err(DataError::MissingLabelColumn(_))
        ));
    }
}
