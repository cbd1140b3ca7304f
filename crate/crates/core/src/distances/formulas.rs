use super::{DistanceId, EPSILON};

/// Clamp to the finite range. Inputs are never NaN by construction.
#[inline]
fn sat(v: f64) -> f64 {
    debug_assert!(!v.is_nan());
    v.clamp(-f64::MAX, f64::MAX)
}

/// Quotient under the degenerate-term rule.
#[inline]
fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            sat(num / EPSILON)
        }
    } else {
        sat(num / den)
    }
}

#[inline]
fn exp(v: f64) -> f64 {
    sat(v.exp())
}

#[inline]
fn mul(a: f64, b: f64) -> f64 {
    sat(a * b)
}

#[inline]
fn ln(v: f64) -> f64 {
    if v == 0.0 {
        EPSILON.ln()
    } else {
        v.ln()
    }
}

#[inline]
fn sqrt0(v: f64) -> f64 {
    v.max(0.0).sqrt()
}

#[inline]
fn sq(v: f64) -> f64 {
    mul(v, v)
}

#[inline]
fn diff(a: f64, b: f64) -> f64 {
    sat(a - b)
}

/// Sequential saturating sum of per-component terms.
#[inline]
fn sum(x: &[f64], y: &[f64], term: impl Fn(f64, f64) -> f64) -> f64 {
    x.iter().zip(y).fold(0.0, |acc, (&a, &b)| sat(acc + term(a, b)))
}

#[inline]
fn add(a: f64, b: f64) -> f64 {
    sat(a + b)
}

/// Midpoint without intermediate overflow.
#[inline]
fn mid(a: f64, b: f64) -> f64 {
    0.5 * a + 0.5 * b
}

pub(super) fn eval(id: DistanceId, x: &[f64], y: &[f64]) -> f64 {
    use DistanceId::*;
    let n = x.len() as f64;
    match id {
        // Lp
        Chebyshev => x
            .iter()
            .zip(y)
            .fold(0.0, |acc: f64, (&a, &b)| acc.max(diff(a, b).abs())),
        ChiSquared => sum(x, y, |a, b| ratio(sq(diff(a, b)), add(a, b).abs())).sqrt(),
        Euclidean => sum(x, y, |a, b| sq(diff(a, b))).sqrt(),
        Gaussian => (-sum(x, y, |a, b| sq(diff(a, b))).sqrt()).exp(),
        LogEuclidean => ln(sum(x, y, |a, b| sq(diff(a, b))).sqrt()),
        Manhattan => sum(x, y, |a, b| diff(a, b).abs()),

        // L1
        BrayCurtis => ratio(sum(x, y, |a, b| diff(a, b).abs()), sum(x, y, add)),
        Canberra => sum(x, y, |a, b| ratio(diff(a, b).abs(), add(a.abs(), b.abs()))),
        Gower => sum(x, y, |a, b| diff(a, b).abs()) / n,
        Kulczynski => ratio(sum(x, y, |a, b| diff(a, b).abs()), sum(x, y, f64::min)),
        Lorentzian => sum(x, y, |a, b| exp(1.0 + diff(a, b).abs())),
        NonIntersection => 0.5 * sum(x, y, |a, b| diff(a, b).abs()),
        Soergel => ratio(sum(x, y, |a, b| diff(a, b).abs()), sum(x, y, f64::max)),

        // Inner product
        Chord => {
            let (dot, xx, yy) = inner(x, y);
            sqrt0(diff(2.0, mul(2.0, ratio(dot, mul(xx, yy)))))
        }
        Cosine => {
            let (dot, xx, yy) = inner(x, y);
            1.0 - ratio(dot, mul(xx, yy))
        }
        Dice => {
            let (dot, xx, yy) = inner(x, y);
            1.0 - ratio(dot, add(xx, yy))
        }
        Jaccard => {
            let (dot, xx, yy) = inner(x, y);
            ratio(sum(x, y, |a, b| sq(diff(a, b))), diff(add(xx, yy), dot))
        }

        // Squared chord
        Bhattacharyya => -exp(sum(x, y, |a, b| sqrt0(mul(a, b)))),
        Hellinger => mul(2.0, squared_chord(x, y)).sqrt(),
        Matusita => squared_chord(x, y).sqrt(),
        SquaredChord => squared_chord(x, y),

        // Squared L2
        AdditiveSymmetricChiSquared => mul(2.0, sum(x, y, |a, b| ratio(mul(sq(diff(a, b)), add(a, b)), mul(a, b)))),
        AverageEuclidean => (sum(x, y, |a, b| sq(diff(a, b))) / n).sqrt(),
        Clark => sum(x, y, |a, b| sq(ratio(diff(a, b), add(a.abs(), b.abs())))).sqrt(),
        Divergence => mul(2.0, sum(x, y, |a, b| ratio(sq(diff(a, b)), sq(add(a, b))))),
        LogSquaredEuclidean => ln(sum(x, y, |a, b| sq(diff(a, b)))),
        MeanCensoredEuclidean => {
            let support = x.iter().zip(y).filter(|(&a, &b)| add(sq(a), sq(b)) != 0.0).count();
            if support == 0 {
                0.0
            } else {
                sum(x, y, |a, b| sq(diff(a, b))) / support as f64
            }
        }
        NeymanChiSquared => neyman(x, y),
        PearsonChiSquared => neyman(y, x),
        SangviChiSquared => mul(2.0, sum(x, y, |a, b| ratio(sq(diff(a, b)), add(a, b)))),
        SquaredChiSquared => sum(x, y, |a, b| ratio(sq(diff(a, b)), add(a, b))),
        SquaredEuclidean => sum(x, y, |a, b| sq(diff(a, b))),

        // Shannon entropy
        Jeffreys => sum(x, y, |a, b| mul(diff(a, b), exp(ratio(a, b)))),
        Jensen => {
            0.5 * sum(x, y, |a, b| {
                let m = mid(a, b);
                diff(mid(mul(a, exp(a)), mul(b, exp(b))), mul(m, exp(m)))
            })
        }
        JensenShannon => 0.5 * add(k_divergence(x, y), k_divergence(y, x)),
        KDivergence => k_divergence(x, y),
        KullbackLeibler => sum(x, y, |a, b| mul(a, exp(ratio(a, b)))),
        Topsoe => add(k_divergence(x, y), k_divergence(y, x)),

        // Vicissitude
        MaxSymmetricChiSquared => neyman(x, y).max(neyman(y, x)),
        MinSymmetricChiSquared => neyman(x, y).min(neyman(y, x)),
        VicisSymmetric1 => sum(x, y, |a, b| ratio(sq(diff(a, b)), sq(a.min(b)))),
        VicisSymmetric2 => sum(x, y, |a, b| ratio(sq(diff(a, b)), a.min(b))),
        VicisSymmetric3 => sum(x, y, |a, b| ratio(sq(diff(a, b)), a.max(b))),
        VicisWaveHedges => sum(x, y, |a, b| ratio(diff(a, b).abs(), a.min(b))),

        // Other
        Hamming => x.iter().zip(y).filter(|(a, b)| a != b).count() as f64,
        Hassanat => sum(x, y, |a, b| {
            let (lo, hi) = (a.min(b), a.max(b));
            if lo >= 0.0 {
                1.0 - ratio(1.0 + lo, 1.0 + hi)
            } else {
                let shift = lo.abs();
                1.0 - ratio(add(1.0 + lo, shift), add(1.0 + hi, shift))
            }
        }),
        ChiSquaredStatistic => sum(x, y, |a, b| {
            let m = mid(a, b);
            ratio(diff(a, m), m)
        }),
    }
}

/// (Σ xᵢyᵢ, Σ xᵢ², Σ yᵢ²)
#[inline]
fn inner(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    (sum(x, y, mul), sum(x, x, mul), sum(y, y, mul))
}

#[inline]
fn squared_chord(x: &[f64], y: &[f64]) -> f64 {
    sum(x, y, |a, b| sq(diff(sqrt0(a), sqrt0(b))))
}

/// Σ (xᵢ−yᵢ)² / xᵢ
#[inline]
fn neyman(x: &[f64], y: &[f64]) -> f64 {
    sum(x, y, |a, b| ratio(sq(diff(a, b)), a))
}

/// Σ xᵢ e^(2xᵢ/(xᵢ+yᵢ))
#[inline]
fn k_divergence(x: &[f64], y: &[f64]) -> f64 {
    sum(x, y, |a, b| mul(a, exp(ratio(mul(2.0, a), add(a, b)))))
}
