use std::fmt;
use std::str::FromStr;

use crate::forest::Label;

use super::EvalError;

/// Per-cell score. Plain accuracy is the default; balanced accuracy (mean
/// per-class recall) is available but never substituted silently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum Metric {
    #[default]
    Accuracy,
    BalancedAccuracy,
}

impl Metric {
    pub fn score(self, predictions: &[Label], truth: &[Label]) -> Result<f64, EvalError> {
        match self {
            Metric::Accuracy => accuracy(predictions, truth),
            Metric::BalancedAccuracy => balanced_accuracy(predictions, truth),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Accuracy => "accuracy",
            Metric::BalancedAccuracy => "balanced_accuracy",
        })
    }
}

impl FromStr for Metric {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "accuracy" => Ok(Metric::Accuracy),
            "balanced_accuracy" | "balanced" => Ok(Metric::BalancedAccuracy),
            other => Err(EvalError::Invalid(format!("unknown metric `{other}`"))),
        }
    }
}

fn check(predictions: &[Label], truth: &[Label]) -> Result<(), EvalError> {
    if predictions.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            left: predictions.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(EvalError::Empty);
    }
    Ok(())
}

/// Fraction of exact matches.
pub fn accuracy(predictions: &[Label], truth: &[Label]) -> Result<f64, EvalError> {
    check(predictions, truth)?;
    let hits = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Mean recall over the classes present in `truth`.
pub fn balanced_accuracy(predictions: &[Label], truth: &[Label]) -> Result<f64, EvalError> {
    check(predictions, truth)?;
    let k = truth.iter().map(|&l| l as usize + 1).max().unwrap_or(0);
    let mut hits = vec![0usize; k];
    let mut totals = vec![0usize; k];
    for (&p, &t) in predictions.iter().zip(truth) {
        totals[t as usize] += 1;
        hits[t as usize] += usize::from(p == t);
    }
    let (sum, present) = hits
        .iter()
        .zip(&totals)
        .filter(|(_, &n)| n > 0)
        .fold((0.0, 0usize), |(s, c), (&h, &n)| (s + h as f64 / n as f64, c + 1));
    Ok(sum / present as f64)
}
