use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use super::{fmt_exact, parse_feature, DataError, Dataset};

/// Which column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LabelColumn {
    /// 0-based position; negative positions are not supported, use `Last`.
    Index(usize),
    Name(String),
    Last,
}

impl FromStr for LabelColumn {
    type Err = DataError;

    /// `last`, a 0-based integer, or a header name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.is_empty() {
            return Err(DataError::Invalid("empty label column".into()));
        }
        if t.eq_ignore_ascii_case("last") {
            return Ok(LabelColumn::Last);
        }
        Ok(match t.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(t.to_string()),
        })
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Index(i) => write!(f, "{i}"),
            LabelColumn::Name(n) => f.write_str(n),
            LabelColumn::Last => f.write_str("last"),
        }
    }
}

/// Parsed rectangular table: features plus optional label text per row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawTable {
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Option<Vec<String>>,
}

impl RawTable {
    pub fn n_features(&self) -> Option<usize> {
        self.rows.first().map(Vec::len)
    }
}

/// Reads a comma-separated table. With `label = None` every column is a
/// feature. A file without data rows yields an empty table.
pub fn read_csv_table(path: &Path, label: Option<&LabelColumn>, has_header: bool) -> Result<RawTable, DataError> {
    let file = File::open(path).map_err(|e| DataError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let mut header: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    let mut label_index: Option<usize> = None;
    let mut rows = Vec::new();
    let mut labels = Vec::new();

    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if has_header && header.is_none() {
            let names: Vec<String> = record.iter().map(str::to_string).collect();
            width = Some(names.len());
            label_index = resolve_label(label, Some(&names), names.len())?;
            header = Some(names);
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(DataError::RaggedRows {
                line,
                expected,
                found: record.len(),
            });
        }
        if label_index.is_none() && label.is_some() {
            label_index = resolve_label(label, None, expected)?;
        }
        let mut row = Vec::with_capacity(expected.saturating_sub(1));
        for (j, token) in record.iter().enumerate() {
            if Some(j) == label_index {
                labels.push(token.to_string());
            } else {
                row.push(parse_feature(token, line, j + 1)?);
            }
        }
        if row.is_empty() {
            return Err(DataError::Invalid(format!("line {line}: no feature columns")));
        }
        rows.push(row);
    }

    Ok(RawTable {
        header,
        rows,
        labels: label.map(|_| labels),
    })
}

fn resolve_label(
    label: Option<&LabelColumn>,
    header: Option<&[String]>,
    width: usize,
) -> Result<Option<usize>, DataError> {
    let Some(label) = label else { return Ok(None) };
    let index = match label {
        LabelColumn::Index(i) => *i,
        LabelColumn::Last => width.saturating_sub(1),
        LabelColumn::Name(name) => header
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| DataError::MissingLabelColumn(name.clone()))?,
    };
    if index >= width {
        return Err(DataError::MissingLabelColumn(label.to_string()));
    }
    Ok(Some(index))
}

fn csv_error(path: &Path, e: csv::Error) -> DataError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => DataError::io(path, source),
        csv::ErrorKind::Utf8 { err, .. } => DataError::Parse {
            line,
            column: err.field() + 1,
            message: "invalid UTF-8".into(),
        },
        other => DataError::Parse {
            line,
            column: 0,
            message: format!("{other:?}"),
        },
    }
}

/// Loads a labelled CSV dataset. Labels are mapped to `0..k` in order of
/// first appearance and their text kept as class names.
pub fn load_csv(path: &Path, label: &LabelColumn, has_header: bool) -> Result<Dataset, DataError> {
    let table = read_csv_table(path, Some(label), has_header)?;
    if table.rows.is_empty() {
        return Err(DataError::EmptyFile);
    }
    let labels = table.labels.unwrap_or_default();
    Dataset::from_rows(dataset_name(path), table.rows, &labels)
}

pub(crate) fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Canonical writer: header `f1..fn,label`, exact shortest float text, label
/// text in the last column.
pub fn write_csv(dataset: &Dataset, path: &Path) -> Result<(), DataError> {
    let io = |e| DataError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    let mut header: Vec<String> = (1..=dataset.n_features()).map(|j| format!("f{j}")).collect();
    header.push("label".into());
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    for s in dataset.samples() {
        let mut fields: Vec<String> = s.features.values().iter().map(|&v| fmt_exact(v)).collect();
        fields.push(csv_field(&dataset.class_name(s.label)));
        writeln!(out, "{}", fields.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) || s.trim() != s {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
