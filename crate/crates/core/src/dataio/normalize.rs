use std::fmt;
use std::str::FromStr;

use crate::distances::FeatureVector;
use crate::forest::Sample;

use super::DataError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum NormalizationMode {
    #[default]
    None,
    /// Per-feature affine map of the training range onto `[0, 1]`.
    MinMax01,
}

impl fmt::Display for NormalizationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormalizationMode::None => "none",
            NormalizationMode::MinMax01 => "min_max_01",
        })
    }
}

impl FromStr for NormalizationMode {
    type Err = DataError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(NormalizationMode::None),
            "min_max_01" | "minmax" | "min-max" => Ok(NormalizationMode::MinMax01),
            other => Err(DataError::Invalid(format!("unknown normalization mode `{other}`"))),
        }
    }
}

/// Fitted normalization. `min`/`max` are empty for [`NormalizationMode::None`].
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationSpec {
    pub mode: NormalizationMode,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormalizationSpec {
    pub fn identity() -> Self {
        NormalizationSpec {
            mode: NormalizationMode::None,
            min: Vec::new(),
            max: Vec::new(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.mode == NormalizationMode::None
    }

    pub fn apply(&self, v: &FeatureVector) -> Result<FeatureVector, DataError> {
        match self.mode {
            NormalizationMode::None => Ok(v.clone()),
            NormalizationMode::MinMax01 => {
                if v.dim() != self.min.len() {
                    return Err(DataError::DimensionMismatch {
                        expected: self.min.len(),
                        found: v.dim(),
                    });
                }
                let out = v
                    .values()
                    .iter()
                    .zip(self.min.iter().zip(&self.max))
                    .map(|(&x, (&lo, &hi))| {
                        let span = hi - lo;
                        if span > 0.0 {
                            ((x - lo) / span).clamp(0.0, 1.0)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                Ok(FeatureVector::new(out).expect("clamped values are finite"))
            }
        }
    }

    pub fn apply_sample(&self, s: &Sample) -> Result<Sample, DataError> {
        Ok(Sample::new(self.apply(&s.features)?, s.label, s.id))
    }
}

/// Fits a normalization on training samples only.
pub fn fit_normalization(train: &[Sample], mode: NormalizationMode) -> Result<NormalizationSpec, DataError> {
    let first = train.first().ok_or(DataError::EmptyFile)?;
    match mode {
        NormalizationMode::None => Ok(NormalizationSpec::identity()),
        NormalizationMode::MinMax01 => {
            let dim = first.features.dim();
            let mut min = vec![f64::INFINITY; dim];
            let mut max = vec![f64::NEG_INFINITY; dim];
            for (row, s) in train.iter().enumerate() {
                if s.features.dim() != dim {
                    return Err(DataError::Invalid(format!(
                        "sample {row} has {} features, expected {dim}",
                        s.features.dim()
                    )));
                }
                for (j, &x) in s.features.values().iter().enumerate() {
                    min[j] = min[j].min(x);
                    max[j] = max[j].max(x);
                }
            }
            Ok(NormalizationSpec { mode, min, max })
        }
    }
}

pub fn apply_normalization(spec: &NormalizationSpec, v: &FeatureVector) -> Result<FeatureVector, DataError> {
    spec.apply(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> Sample {
        Sample::new(FeatureVector::new(v.to_vec()).unwrap(), 0, 0)
    }

    fn fv(v: &[f64]) -> FeatureVector {
        FeatureVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn none_is_identity() {
        let spec = fit_normalization(&[s(&[5.0, -3.0])], NormalizationMode::None).unwrap();
        assert_eq!(spec.apply(&fv(&[7.0, 9.0])).unwrap(), fv(&[7.0, 9.0]));
    }

    #[test]
    fn min_max_maps_midpoint_and_clamps() {
        let spec = fit_normalization(&[s(&[2.0, 1.0]), s(&[4.0, 1.0])], NormalizationMode::MinMax01).unwrap();
        assert_eq!(spec.apply(&fv(&[3.0, 1.0])).unwrap(), fv(&[0.5, 0.0]));
        assert_eq!(spec.apply(&fv(&[10.0, 1.0])).unwrap(), fv(&[1.0, 0.0]));
        assert_eq!(spec.apply(&fv(&[-10.0, 7.0])).unwrap(), fv(&[0.0, 0.0]));
    }

    #[test]
    fn errors() {
        assert!(fit_normalization(&[], NormalizationMode::MinMax01).is_err());
        let spec = fit_normalization(&[s(&[2.0])], NormalizationMode::MinMax01).unwrap();
        assert!(spec.apply(&fv(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn parse_modes() {
        assert_eq!("none".parse::<NormalizationMode>().unwrap(), NormalizationMode::None);
        assert_eq!(
            "min_max_01".parse::<NormalizationMode>().unwrap(),
            NormalizationMode::MinMax01
        );
        assert!("zscore".parse::<NormalizationMode>().is_err());
    }
}
