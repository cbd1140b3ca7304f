use std::collections::HashMap;

use crate::distances::FeatureVector;
use crate::forest::{Label, Sample};

use super::DataError;

/// A labelled sample collection. Labels form the contiguous range
/// `0..n_classes`; `class_names[l]` is the source text of label `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    samples: Vec<Sample>,
    n_features: usize,
    n_classes: usize,
    class_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        samples: Vec<Sample>,
        class_names: Option<Vec<String>>,
    ) -> Result<Self, DataError> {
        let first = samples.first().ok_or(DataError::EmptyFile)?;
        let n_features = first.features.dim();
        if let Some((row, s)) = samples.iter().enumerate().find(|(_, s)| s.features.dim() != n_features) {
            return Err(DataError::Invalid(format!(
                "sample {row} has {} features, expected {n_features}",
                s.features.dim()
            )));
        }
        let n_classes = samples.iter().map(|s| s.label as usize + 1).max().unwrap_or(0);
        let mut present = vec![false; n_classes];
        for s in &samples {
            present[s.label as usize] = true;
        }
        if let Some(missing) = present.iter().position(|p| !p) {
            return Err(DataError::Invalid(format!(
                "labels are not contiguous: label {missing} has no samples"
            )));
        }
        if let Some(names) = &class_names {
            if names.len() != n_classes {
                return Err(DataError::Invalid(format!(
                    "{} class names for {n_classes} classes",
                    names.len()
                )));
            }
        }
        Ok(Dataset {
            name: name.into(),
            samples,
            n_features,
            n_classes,
            class_names,
        })
    }

    /// Builds a dataset from rows and textual labels, mapping labels to
    /// integers in order of first appearance.
    pub fn from_rows<S: AsRef<str>>(
        name: impl Into<String>,
        rows: Vec<Vec<f64>>,
        labels: &[S],
    ) -> Result<Self, DataError> {
        if rows.len() != labels.len() {
            return Err(DataError::Invalid(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let (ids, names) = map_labels(labels);
        let samples = rows
            .into_iter()
            .zip(ids)
            .enumerate()
            .map(|(i, (row, label))| {
                FeatureVector::new(row)
                    .map(|f| Sample::new(f, label, i))
                    .map_err(|e| DataError::Invalid(format!("row {i}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Dataset::new(name, samples, Some(names))
    }

    /// The same dataset under another name.
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn class_names(&self) -> Option<&[String]> {
        self.class_names.as_deref()
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.samples.iter().map(|s| s.label)
    }

    /// Text of `label`, falling back to its number.
    pub fn class_name(&self, label: Label) -> String {
        self.class_names
            .as_ref()
            .and_then(|n| n.get(label as usize).cloned())
            .unwrap_or_else(|| label.to_string())
    }

    /// Samples per class, indexed by label.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for s in &self.samples {
            counts[s.label as usize] += 1;
        }
        counts
    }
}

/// First-appearance mapping of label text to `0..k`.
pub(crate) fn map_labels<S: AsRef<str>>(labels: &[S]) -> (Vec<Label>, Vec<String>) {
    let mut index: HashMap<&str, Label> = HashMap::new();
    let mut names = Vec::new();
    let ids = labels
        .iter()
        .map(|l| {
            let l = l.as_ref();
            *index.entry(l).or_insert_with(|| {
                names.push(l.to_string());
                (names.len() - 1) as Label
            })
        })
        .collect();
    (ids, names)
}
