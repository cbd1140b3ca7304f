use std::fs;
use std::path::Path;

use super::csv_io::{dataset_name, RawTable};
use super::{parse_feature, DataError, Dataset};

/// Reads `<label> <index>:<value> ...` lines (1-based, strictly ascending
/// indices) into dense rows. Blank lines and `#` comments are skipped, `qid:`
/// tokens ignored. Rows are densified to the largest index seen, or to
/// `min_features` when that is larger.
pub fn read_svmlight_table(path: &Path, min_features: Option<usize>) -> Result<RawTable, DataError> {
    let text = fs::read_to_string(path).map_err(|e| DataError::io(path, e))?;
    let mut sparse: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label = tokens.next().expect("non-empty line has a token");
        if label.contains(':') {
            return Err(DataError::Parse {
                line,
                column: 1,
                message: format!("expected a label, found `{label}`"),
            });
        }
        let mut entries = Vec::new();
        let mut last = 0usize;
        for (t, token) in tokens.enumerate() {
            let column = t + 2;
            let (idx, value) = token.split_once(':').ok_or_else(|| DataError::Parse {
                line,
                column,
                message: format!("expected index:value, found `{token}`"),
            })?;
            if idx == "qid" {
                continue;
            }
            let index: usize = idx.parse().map_err(|_| DataError::Parse {
                line,
                column,
                message: format!("bad feature index `{idx}`"),
            })?;
            if index == 0 {
                return Err(DataError::Parse {
                    line,
                    column,
                    message: "feature indices are 1-based".into(),
                });
            }
            if index <= last {
                return Err(DataError::NonAscendingIndices { line, index });
            }
            last = index;
            entries.push((index, parse_feature(value, line, column)?));
        }
        max_index = max_index.max(last);
        labels.push(label.to_string());
        sparse.push(entries);
    }

    let dim = max_index.max(min_features.unwrap_or(0));
    if !sparse.is_empty() && dim == 0 {
        return Err(DataError::Invalid("no feature indices in file".into()));
    }
    let rows = sparse
        .into_iter()
        .map(|entries| {
            let mut row = vec![0.0; dim];
            for (index, value) in entries {
                row[index - 1] = value;
            }
            row
        })
        .collect();
    Ok(RawTable {
        header: None,
        rows,
        labels: Some(labels),
    })
}

pub fn load_svmlight(path: &Path) -> Result<Dataset, DataError> {
    let table = read_svmlight_table(path, None)?;
    if table.rows.is_empty() {
        return Err(DataError::EmptyFile);
    }
    let labels = table.labels.unwrap_or_default();
    Dataset::from_rows(dataset_name(path), table.rows, &labels)
}
