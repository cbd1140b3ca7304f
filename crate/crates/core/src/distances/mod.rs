//! Distance measures for weighting arcs of the optimum-path forest graph.
//!
//! Every measure is evaluated through [`evaluate`] (or [`DistanceId::eval`] on
//! raw slices). Formulas are applied exactly as catalogued, including the
//! entropy-family variants built on exponentials, so several measures are not
//! metrics: some return negative values and some do not vanish on identical
//! inputs. [`check_axioms`] probes those properties empirically.
//!
//! Degenerate terms are handled uniformly: a quotient with an exactly-zero
//! denominator is 0 when its numerator is 0 as well, and otherwise the
//! denominator is replaced by [`EPSILON`]. Exponentials, products and running
//! sums saturate at `±f64::MAX`, so every evaluation on finite input is finite.

mod axioms;
mod formulas;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use axioms::{check_axioms, Axiom, AxiomOutcome, AxiomReport, Counterexample};

/// Replacement for an exactly-zero denominator (or logarithm argument).
pub const EPSILON: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DistanceError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("{code} requires non-negative input, found {value} at component {index}")]
    DomainViolation {
        code: &'static str,
        index: usize,
        value: f64,
    },
    #[error("feature vector must have at least one component")]
    EmptyVector,
    #[error("non-finite feature value {value} at component {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("unknown distance code `{0}`")]
    UnknownCode(String),
    #[error("axiom check needs at least one sample")]
    NoSamples,
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
}

/// A dense, finite, non-empty feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self, DistanceError> {
        if values.is_empty() {
            return Err(DistanceError::EmptyVector);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(DistanceError::NonFinite { index, value });
        }
        Ok(FeatureVector(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for FeatureVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// The eight families the measures are grouped into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Taxonomy {
    Lp,
    L1,
    InnerProduct,
    SquaredChord,
    SquaredL2,
    ShannonEntropy,
    Vicissitude,
    Other,
}

impl fmt::Display for Taxonomy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Taxonomy::Lp => "Lp",
            Taxonomy::L1 => "L1",
            Taxonomy::InnerProduct => "Inner Product",
            Taxonomy::SquaredChord => "Squared Chord",
            Taxonomy::SquaredL2 => "Squared L2",
            Taxonomy::ShannonEntropy => "Shannon Entropy",
            Taxonomy::Vicissitude => "Vicissitude",
            Taxonomy::Other => "Other",
        };
        f.write_str(s)
    }
}

/// How negative input is treated by measures that take square roots of
/// individual components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DomainPolicy {
    /// Negative radicands are clamped to zero.
    #[default]
    Permissive,
    /// Negative components are rejected with [`DistanceError::DomainViolation`].
    Strict,
}

macro_rules! distance_ids {
    ($( $variant:ident = $num:literal, $code:literal, $name:literal, $tax:ident,
        nonneg: $nonneg:literal, identity: $ident:literal, symmetric: $sym:literal; )*) => {
        /// Identifier of one of the 47 catalogued distance measures.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        #[repr(u8)]
        pub enum DistanceId {
            $( $variant = $num, )*
        }

        static REGISTRY: [DistanceInfo; 47] = [
            $( DistanceInfo {
                id: DistanceId::$variant,
                code: $code,
                name: $name,
                taxonomy: Taxonomy::$tax,
                requires_nonnegative_input: $nonneg,
                satisfies_identity: $ident,
                symmetric: $sym,
            }, )*
        ];
    };
}

distance_ids! {
    Chebyshev = 1, "D1", "Chebyshev", Lp, nonneg: false, identity: true, symmetric: true;
    ChiSquared = 2, "D2", "Chi-Squared", Lp, nonneg: false, identity: true, symmetric: true;
    Euclidean = 3, "D3", "Euclidean", Lp, nonneg: false, identity: true, symmetric: true;
    Gaussian = 4, "D4", "Gaussian", Lp, nonneg: false, identity: false, symmetric: true;
    LogEuclidean = 5, "D5", "Log-Euclidean", Lp, nonneg: false, identity: false, symmetric: true;
    Manhattan = 6, "D6", "Manhattan", Lp, nonneg: false, identity: true, symmetric: true;
    BrayCurtis = 7, "D7", "Bray-Curtis", L1, nonneg: false, identity: true, symmetric: true;
    Canberra = 8, "D8", "Canberra", L1, nonneg: false, identity: true, symmetric: true;
    Gower = 9, "D9", "Gower", L1, nonneg: false, identity: true, symmetric: true;
    Kulczynski = 10, "D10", "Kulczynski", L1, nonneg: false, identity: true, symmetric: true;
    Lorentzian = 11, "D11", "Lorentzian", L1, nonneg: false, identity: false, symmetric: true;
    NonIntersection = 12, "D12", "Non-Intersection", L1, nonneg: false, identity: true, symmetric: true;
    Soergel = 13, "D13", "Soergel", L1, nonneg: false, identity: true, symmetric: true;
    Chord = 14, "D14", "Chord", InnerProduct, nonneg: false, identity: false, symmetric: true;
    Cosine = 15, "D15", "Cosine", InnerProduct, nonneg: false, identity: false, symmetric: true;
    Dice = 16, "D16", "Dice", InnerProduct, nonneg: false, identity: false, symmetric: true;
    Jaccard = 17, "D17", "Jaccard", InnerProduct, nonneg: false, identity: true, symmetric: true;
    Bhattacharyya = 18, "D18", "Bhattacharyya", SquaredChord, nonneg: true, identity: false, symmetric: true;
    Hellinger = 19, "D19", "Hellinger", SquaredChord, nonneg: true, identity: true, symmetric: true;
    Matusita = 20, "D20", "Matusita", SquaredChord, nonneg: true, identity: true, symmetric: true;
    SquaredChord = 21, "D21", "Squared Chord", SquaredChord, nonneg: true, identity: true, symmetric: true;
    AdditiveSymmetricChiSquared = 22, "D22", "Additive Symmetric Chi-Squared", SquaredL2, nonneg: false, identity: true, symmetric: true;
    AverageEuclidean = 23, "D23", "Average Euclidean", SquaredL2, nonneg: false, identity: true, symmetric: true;
    Clark = 24, "D24", "Clark", SquaredL2, nonneg: false, identity: true, symmetric: true;
    Divergence = 25, "D25", "Divergence", SquaredL2, nonneg: false, identity: true, symmetric: true;
    LogSquaredEuclidean = 26, "D26", "Log-Squared Euclidean", SquaredL2, nonneg: false, identity: false, symmetric: true;
    MeanCensoredEuclidean = 27, "D27", "Mean Censored Euclidean", SquaredL2, nonneg: false, identity: true, symmetric: true;
    NeymanChiSquared = 28, "D28", "Neyman Chi-Squared", SquaredL2, nonneg: false, identity: true, symmetric: false;
    PearsonChiSquared = 29, "D29", "Pearson Chi-Squared", SquaredL2, nonneg: false, identity: true, symmetric: false;
    SangviChiSquared = 30, "D30", "Sangvi Chi-Squared", SquaredL2, nonneg: false, identity: true, symmetric: true;
    SquaredChiSquared = 31, "D31", "Squared Chi-Squared", SquaredL2, nonneg: false, identity: true, symmetric: true;
    SquaredEuclidean = 32, "D32", "Squared Euclidean", SquaredL2, nonneg: false, identity: true, symmetric: true;
    Jeffreys = 33, "D33", "Jeffreys", ShannonEntropy, nonneg: false, identity: true, symmetric: false;
    Jensen = 34, "D34", "Jensen", ShannonEntropy, nonneg: false, identity: true, symmetric: true;
    JensenShannon = 35, "D35", "Jensen-Shannon", ShannonEntropy, nonneg: false, identity: false, symmetric: true;
    KDivergence = 36, "D36", "K-Divergence", ShannonEntropy, nonneg: false, identity: false, symmetric: false;
    KullbackLeibler = 37, "D37", "Kullback-Leibler", ShannonEntropy, nonneg: false, identity: false, symmetric: false;
    Topsoe = 38, "D38", "Topsoe", ShannonEntropy, nonneg: false, identity: false, symmetric: true;
    MaxSymmetricChiSquared = 39, "D39", "Max Symmetric Chi-Squared", Vicissitude, nonneg: false, identity: true, symmetric: true;
    MinSymmetricChiSquared = 40, "D40", "Min Symmetric Chi-Squared", Vicissitude, nonneg: false, identity: true, symmetric: true;
    VicisSymmetric1 = 41, "D41", "Vicis Symmetric 1", Vicissitude, nonneg: false, identity: true, symmetric: true;
    VicisSymmetric2 = 42, "D42", "Vicis Symmetric 2", Vicissitude, nonneg: false, identity: true, symmetric: true;
    VicisSymmetric3 = 43, "D43", "Vicis Symmetric 3", Vicissitude, nonneg: false, identity: true, symmetric: true;
    VicisWaveHedges = 44, "D44", "Vicis-Wave Hedges", Vicissitude, nonneg: false, identity: true, symmetric: true;
    Hamming = 45, "D45", "Hamming", Other, nonneg: false, identity: true, symmetric: true;
    Hassanat = 46, "D46", "Hassanat", Other, nonneg: false, identity: true, symmetric: true;
    ChiSquaredStatistic = 47, "D47", "Chi-Squared Statistic", Other, nonneg: false, identity: true, symmetric: false;
}

/// Registry entry: a measure together with its catalogue metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistanceInfo {
    pub id: DistanceId,
    pub code: &'static str,
    pub name: &'static str,
    pub taxonomy: Taxonomy,
    /// Square roots are taken of individual components (or their products).
    pub requires_nonnegative_input: bool,
    /// `d(x, x) = 0` holds analytically for the formula.
    pub satisfies_identity: bool,
    /// `d(x, y) = d(y, x)` holds for the formula.
    pub symmetric: bool,
}

/// All 47 measures in catalogue order (D1 first).
pub fn registry() -> &'static [DistanceInfo] {
    &REGISTRY
}

impl DistanceId {
    pub fn all() -> impl Iterator<Item = DistanceId> {
        REGISTRY.iter().map(|info| info.id)
    }

    /// 1-based catalogue number.
    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Option<DistanceId> {
        REGISTRY.get(usize::from(n).checked_sub(1)?).map(|info| info.id)
    }

    pub fn info(self) -> &'static DistanceInfo {
        &REGISTRY[usize::from(self.number()) - 1]
    }

    pub fn code(self) -> &'static str {
        self.info().code
    }

    pub fn name(self) -> &'static str {
        self.info().name
    }

    /// Evaluates the measure on raw slices of equal length, without domain
    /// checks. Negative radicands are clamped to zero.
    ///
    /// # Panics
    ///
    /// Panics in debug builds if the slices differ in length.
    #[inline]
    pub fn eval(self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        formulas::eval(self, x, y)
    }
}

impl fmt::Display for DistanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for DistanceId {
    type Err = DistanceError;

    /// Accepts a catalogue code (`D7`, case-insensitive) or a measure name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if let Some(num) = t.strip_prefix(['D', 'd']) {
            if let Ok(n) = num.parse::<u8>() {
                return DistanceId::from_number(n).ok_or_else(|| DistanceError::UnknownCode(s.to_string()));
            }
        }
        REGISTRY
            .iter()
            .find(|info| info.name.eq_ignore_ascii_case(t))
            .map(|info| info.id)
            .ok_or_else(|| DistanceError::UnknownCode(s.to_string()))
    }
}

/// Evaluates measure `id` between `x` and `y` under the permissive domain policy.
pub fn evaluate(id: DistanceId, x: &FeatureVector, y: &FeatureVector) -> Result<f64, DistanceError> {
    evaluate_with(id, x, y, DomainPolicy::Permissive)
}

pub fn evaluate_with(
    id: DistanceId,
    x: &FeatureVector,
    y: &FeatureVector,
    policy: DomainPolicy,
) -> Result<f64, DistanceError> {
    if x.dim() != y.dim() {
        return Err(DistanceError::DimensionMismatch {
            left: x.dim(),
            right: y.dim(),
        });
    }
    if policy == DomainPolicy::Strict {
        check_domain(id, x.values())?;
        check_domain(id, y.values())?;
    }
    Ok(id.eval(x.values(), y.values()))
}

fn check_domain(id: DistanceId, v: &[f64]) -> Result<(), DistanceError> {
    if !id.info().requires_nonnegative_input {
        return Ok(());
    }
    match v.iter().enumerate().find(|(_, &c)| c < 0.0) {
        Some((index, &value)) => Err(DistanceError::DomainViolation {
            code: id.code(),
            index,
            value,
        }),
        None => Ok(()),
    }
}

/// Distances from `query` to every vector of `corpus`, in corpus order.
pub fn evaluate_batch(
    id: DistanceId,
    query: &FeatureVector,
    corpus: &[FeatureVector],
) -> Result<Vec<f64>, DistanceError> {
    corpus.iter().map(|y| evaluate(id, query, y)).collect()
}
