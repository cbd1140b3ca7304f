use std::fmt;

use super::{DistanceError, DistanceId, FeatureVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axiom {
    Identity,
    Symmetry,
    TriangleInequality,
    NonNegativity,
}

impl Axiom {
    pub const ALL: [Axiom; 4] = [
        Axiom::Identity,
        Axiom::Symmetry,
        Axiom::TriangleInequality,
        Axiom::NonNegativity,
    ];
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::Identity => "identity",
            Axiom::Symmetry => "symmetry",
            Axiom::TriangleInequality => "triangle",
            Axiom::NonNegativity => "non-negativity",
        })
    }
}

/// Sample indices and the offending distance values.
#[derive(Debug, Clone, PartialEq)]
pub enum Counterexample {
    /// `d(x_i, x_i)` is not zero.
    Identity {
        i: usize,
        d_ii: f64,
    },
    Symmetry {
        i: usize,
        j: usize,
        d_ij: f64,
        d_ji: f64,
    },
    /// `d(x_i, x_j) > d(x_i, x_k) + d(x_k, x_j)`.
    Triangle {
        i: usize,
        j: usize,
        k: usize,
        d_ij: f64,
        d_ik: f64,
        d_kj: f64,
    },
    NonNegativity {
        i: usize,
        j: usize,
        d_ij: f64,
    },
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Counterexample::Identity { i, d_ii } => write!(f, "d(x{i},x{i})={d_ii}"),
            Counterexample::Symmetry { i, j, d_ij, d_ji } => {
                write!(f, "d(x{i},x{j})={d_ij} != d(x{j},x{i})={d_ji}")
            }
            Counterexample::Triangle {
                i,
                j,
                k,
                d_ij,
                d_ik,
                d_kj,
            } => write!(f, "d(x{i},x{j})={d_ij} > d(x{i},x{k})+d(x{k},x{j})={}", d_ik + d_kj),
            Counterexample::NonNegativity { i, j, d_ij } => write!(f, "d(x{i},x{j})={d_ij}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomOutcome {
    pub axiom: Axiom,
    /// First violation in scan order, `None` when the axiom held on every tuple.
    pub counterexample: Option<Counterexample>,
}

impl AxiomOutcome {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub distance: DistanceId,
    pub outcomes: [AxiomOutcome; 4],
}

impl AxiomReport {
    pub fn outcome(&self, axiom: Axiom) -> &AxiomOutcome {
        self.outcomes
            .iter()
            .find(|o| o.axiom == axiom)
            .expect("every axiom is reported")
    }

    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(AxiomOutcome::passed)
    }
}

/// Empirically tests the four metric axioms of `id` over all pairs and
/// ordered triples of `samples`, with absolute tolerance `tolerance`.
pub fn check_axioms(id: DistanceId, samples: &[FeatureVector], tolerance: f64) -> Result<AxiomReport, DistanceError> {
    let first = samples.first().ok_or(DistanceError::NoSamples)?;
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(DistanceError::BadTolerance(tolerance));
    }
    if let Some(bad) = samples.iter().find(|s| s.dim() != first.dim()) {
        return Err(DistanceError::DimensionMismatch {
            left: first.dim(),
            right: bad.dim(),
        });
    }

    let n = samples.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = id.eval(samples[i].values(), samples[j].values());
        }
    }
    let at = |i: usize, j: usize| d[i * n + j];

    let identity = (0..n)
        .map(|i| (i, at(i, i)))
        .find(|&(_, v)| v.abs() > tolerance)
        .map(|(i, d_ii)| Counterexample::Identity { i, d_ii });

    let symmetry = pairs(n)
        .filter(|&(i, j)| i < j)
        .find(|&(i, j)| (at(i, j) - at(j, i)).abs() > tolerance)
        .map(|(i, j)| Counterexample::Symmetry {
            i,
            j,
            d_ij: at(i, j),
            d_ji: at(j, i),
        });

    let triangle = pairs(n)
        .flat_map(|(i, j)| (0..n).map(move |k| (i, j, k)))
        .find(|&(i, j, k)| at(i, j) > at(i, k) + at(k, j) + tolerance)
        .map(|(i, j, k)| Counterexample::Triangle {
            i,
            j,
            k,
            d_ij: at(i, j),
            d_ik: at(i, k),
            d_kj: at(k, j),
        });

    let non_negativity = pairs(n)
        .find(|&(i, j)| at(i, j) < -tolerance)
        .map(|(i, j)| Counterexample::NonNegativity { i, j, d_ij: at(i, j) });

    Ok(AxiomReport {
        distance: id,
        outcomes: [
            AxiomOutcome {
                axiom: Axiom::Identity,
                counterexample: identity,
            },
            AxiomOutcome {
                axiom: Axiom::Symmetry,
                counterexample: symmetry,
            },
            AxiomOutcome {
                axiom: Axiom::TriangleInequality,
                counterexample: triangle,
            },
            AxiomOutcome {
                axiom: Axiom::NonNegativity,
                counterexample: non_negativity,
            },
        ],
    })
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (0..n).map(move |j| (i, j)))
}
