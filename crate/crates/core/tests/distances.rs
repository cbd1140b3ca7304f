//! Distance catalogue against a naive reference written straight from the
//! formulas, plus property checks.

use opf_core::distances::{evaluate, evaluate_batch, evaluate_with, registry, DistanceError, DomainPolicy};
use opf_core::{DistanceId, FeatureVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn s<F: Fn(f64, f64) -> f64>(x: &[f64], y: &[f64], f: F) -> f64 {
    x.iter().zip(y).map(|(&a, &b)| f(a, b)).sum()
}

/// Reference values for strictly positive, unequal inputs, where no
/// degenerate-term rule applies (except the documented D14 radicand clamp).
fn reference(n: u8, x: &[f64], y: &[f64]) -> f64 {
    let dim = x.len() as f64;
    let sq = |a: f64, b: f64| (a - b) * (a - b);
    let l1 = s(x, y, |a, b| (a - b).abs());
    let l2sq = s(x, y, sq);
    let dot = s(x, y, |a, b| a * b);
    let xx = s(x, y, |a, _| a * a);
    let yy = s(x, y, |_, b| b * b);
    let neyman = s(x, y, |a, b| sq(a, b) / a);
    let pearson = s(x, y, |a, b| sq(a, b) / b);
    let kdiv = |p: &[f64], q: &[f64]| s(p, q, |a, b| a * (2.0 * a / (a + b)).exp());
    let sqrt_diff = s(x, y, |a, b| (a.sqrt() - b.sqrt()).powi(2));
    match n {
        1 => x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
        2 => s(x, y, |a, b| sq(a, b) / (a + b).abs()).sqrt(),
        3 => l2sq.sqrt(),
        4 => (-l2sq.sqrt()).exp(),
        5 => l2sq.sqrt().ln(),
        6 => l1,
        7 => l1 / s(x, y, |a, b| a + b),
        8 => s(x, y, |a, b| (a - b).abs() / (a.abs() + b.abs())),
        9 => l1 / dim,
        10 => l1 / s(x, y, f64::min),
        11 => s(x, y, |a, b| (1.0 + (a - b).abs()).exp()),
        12 => 0.5 * l1,
        13 => l1 / s(x, y, f64::max),
        14 => (2.0 - 2.0 * dot / (xx * yy)).max(0.0).sqrt(),
        15 => 1.0 - dot / (xx * yy),
        16 => 1.0 - dot / (xx + yy),
        17 => l2sq / (xx + yy - dot),
        18 => -s(x, y, |a, b| (a * b).sqrt()).exp(),
        19 => (2.0 * sqrt_diff).sqrt(),
        20 => sqrt_diff.sqrt(),
        21 => sqrt_diff,
        22 => 2.0 * s(x, y, |a, b| sq(a, b) * (a + b) / (a * b)),
        23 => (l2sq / dim).sqrt(),
        24 => s(x, y, |a, b| ((a - b) / (a.abs() + b.abs())).powi(2)).sqrt(),
        25 => 2.0 * s(x, y, |a, b| sq(a, b) / (a + b).powi(2)),
        26 => l2sq.ln(),
        27 => l2sq / x.iter().zip(y).filter(|&(&a, &b)| a * a + b * b != 0.0).count() as f64,
        28 => neyman,
        29 => pearson,
        30 => 2.0 * s(x, y, |a, b| sq(a, b) / (a + b)),
        31 => s(x, y, |a, b| sq(a, b) / (a + b)),
        32 => l2sq,
        33 => s(x, y, |a, b| (a - b) * (a / b).exp()),
        34 => {
            0.5 * s(x, y, |a, b| {
                let m = (a + b) / 2.0;
                (a * a.exp() + b * b.exp()) / 2.0 - m * m.exp()
            })
        }
        35 => 0.5 * (kdiv(x, y) + kdiv(y, x)),
        36 => kdiv(x, y),
        37 => s(x, y, |a, b| a * (a / b).exp()),
        38 => kdiv(x, y) + kdiv(y, x),
        39 => neyman.max(pearson),
        40 => neyman.min(pearson),
        41 => s(x, y, |a, b| sq(a, b) / a.min(b).powi(2)),
        42 => s(x, y, |a, b| sq(a, b) / a.min(b)),
        43 => s(x, y, |a, b| sq(a, b) / a.max(b)),
        44 => s(x, y, |a, b| (a - b).abs() / a.min(b)),
        45 => x.iter().zip(y).filter(|(a, b)| a != b).count() as f64,
        46 => s(x, y, |a, b| {
            let (lo, hi) = (a.min(b), a.max(b));
            if lo >= 0.0 {
                1.0 - (1.0 + lo) / (1.0 + hi)
            } else {
                1.0 - (1.0 + lo + lo.abs()) / (1.0 + hi + lo.abs())
            }
        }),
        47 => s(x, y, |a, b| {
            let m = (a + b) / 2.0;
            (a - m) / m
        }),
        _ => unreachable!(),
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-3)
}

fn fv(v: &[f64]) -> FeatureVector {
    FeatureVector::new(v.to_vec()).unwrap()
}

#[test]
fn matches_reference_on_positive_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..2000 {
        let dim = rng.random_range(1..8);
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(0.05..3.0)).collect();
        let y: Vec<f64> = (0..dim).map(|_| rng.random_range(0.05..3.0)).collect();
        for id in DistanceId::all() {
            let got = evaluate(id, &fv(&x), &fv(&y)).unwrap();
            let want = reference(id.number(), &x, &y);
            assert!(close(got, want), "{id}: got {got}, reference {want}, x={x:?}, y={y:?}");
        }
    }
}

#[test]
fn registry_shape() {
    let r = registry();
    assert_eq!(r.len(), 47);
    for (i, info) in r.iter().enumerate() {
        assert_eq!(info.id.number() as usize, i + 1);
        assert_eq!(info.code, format!("D{}", i + 1));
    }
    assert_eq!(r[2].name, "Euclidean");
    for code in ["D4", "D5", "D11", "D18", "D26"] {
        let id: DistanceId = code.parse().unwrap();
        assert!(!id.info().satisfies_identity, "{code}");
    }
}

#[test]
fn spec_examples() {
    let e = |id, x: &[f64], y: &[f64]| evaluate(id, &fv(x), &fv(y)).unwrap();
    assert_eq!(e(DistanceId::Euclidean, &[3.0, 4.0], &[0.0, 0.0]), 5.0);
    assert_eq!(e(DistanceId::Chebyshev, &[1.0, 5.0], &[4.0, 1.0]), 4.0);
    assert_eq!(e(DistanceId::Hamming, &[1.0, 2.0, 3.0], &[1.0, 0.0, 3.0]), 1.0);
    assert_eq!(e(DistanceId::Gaussian, &[0.3, 0.7], &[0.3, 0.7]), 1.0);
    assert!((e(DistanceId::BrayCurtis, &[1.0, 1.0], &[3.0, 1.0]) - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(e(DistanceId::Hassanat, &[0.0], &[0.0]), 0.0);
    let batch = evaluate_batch(
        DistanceId::Manhattan,
        &fv(&[1.0, 1.0]),
        &[fv(&[2.0, 2.0]), fv(&[0.0, 0.0]), fv(&[1.0, 1.0])],
    );
    assert_eq!(batch.unwrap(), vec![2.0, 2.0, 0.0]);
    assert!(evaluate_batch(DistanceId::Euclidean, &fv(&[1.0]), &[])
        .unwrap()
        .is_empty());
}

#[test]
fn strict_mode_rejects_negative_square_roots() {
    for id in [
        DistanceId::Hellinger,
        DistanceId::Matusita,
        DistanceId::SquaredChord,
        DistanceId::Bhattacharyya,
    ] {
        let r = evaluate_with(id, &fv(&[-1.0, 1.0]), &fv(&[1.0, 1.0]), DomainPolicy::Strict);
        assert!(matches!(r, Err(DistanceError::DomainViolation { .. })), "{id}");
        let p = evaluate_with(id, &fv(&[-1.0, 1.0]), &fv(&[1.0, 1.0]), DomainPolicy::Permissive).unwrap();
        assert!(p.is_finite());
    }
}

fn vec_pair(dim: std::ops::Range<usize>) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    dim.prop_flat_map(|n| {
        let comp = prop_oneof![
            3 => -5.0..5.0f64,
            1 => Just(0.0),
            1 => Just(1.0),
            1 => -1e3..1e3f64,
        ];
        (
            proptest::collection::vec(comp.clone(), n),
            proptest::collection::vec(comp, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn totality_and_determinism((x, y) in vec_pair(1..9)) {
        for id in DistanceId::all() {
            let a = id.eval(&x, &y);
            prop_assert!(a.is_finite(), "{} gave {} on {:?} {:?}", id, a, x, y);
            prop_assert_eq!(a.to_bits(), id.eval(&x, &y).to_bits());
        }
    }

    #[test]
    fn symmetric_measures_are_symmetric((x, y) in vec_pair(1..9)) {
        for id in DistanceId::all().filter(|d| d.info().symmetric) {
            let (a, b) = (id.eval(&x, &y), id.eval(&y, &x));
            prop_assert!(close(a, b), "{}: {} vs {}", id, a, b);
        }
    }

    #[test]
    fn identity_holds_where_declared(x in proptest::collection::vec(0.0..10.0f64, 1..9)) {
        for id in DistanceId::all().filter(|d| d.info().satisfies_identity) {
            prop_assert_eq!(id.eval(&x, &x), 0.0, "{}", id);
        }
    }

    #[test]
    fn internal_identities((x, y) in vec_pair(1..12)) {
        let d3 = DistanceId::Euclidean.eval(&x, &y);
        let d32 = DistanceId::SquaredEuclidean.eval(&x, &y);
        prop_assert!(close(d32, d3 * d3));
        let d6 = DistanceId::Manhattan.eval(&x, &y);
        let d12 = DistanceId::NonIntersection.eval(&x, &y);
        prop_assert!(close(d12, d6 / 2.0));
    }

    #[test]
    fn mismatched_dimensions_error(x in proptest::collection::vec(0.0..1.0f64, 1..5), extra in 1usize..3) {
        let y: Vec<f64> = x.iter().copied().chain(std::iter::repeat_n(0.5, extra)).collect();
        for id in DistanceId::all() {
            let is_mismatch = matches!(evaluate(id, &fv(&x), &fv(&y)), Err(DistanceError::DimensionMismatch { .. }));
            prop_assert!(is_mismatch);
        }
    }
}
