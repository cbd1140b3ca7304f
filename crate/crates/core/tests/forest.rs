//! Training and classification checked against brute-force oracles.

use opf_core::forest::{find_prototypes, train, train_with, Label, Sample, TrainOptions, TrainingGraph};
use opf_core::{DistanceId, FeatureVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_samples(rng: &mut ChaCha8Rng, n: usize, dim: usize, classes: u32) -> Vec<Sample> {
    (0..n)
        .map(|i| {
            let v = (0..dim).map(|_| rng.random_range(0.0..1.0)).collect();
            // first `classes` nodes cover every label
            let label = if (i as u32) < classes {
                i as u32
            } else {
                rng.random_range(0..classes)
            };
            Sample::new(FeatureVector::new(v).unwrap(), label, i)
        })
        .collect()
}

/// Minimax path cost from the prototype set, by Floyd–Warshall on the
/// directed arc weights. Prototypes start at zero, so costs are floored at 0.
fn bottleneck_costs(g: &TrainingGraph, prototypes: &[usize]) -> Vec<f64> {
    let n = g.len();
    let mut b = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in b.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if i != j {
                *cell = g.weight(i, j);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = b[i][k].max(b[k][j]);
                if via < b[i][j] {
                    b[i][j] = via;
                }
            }
        }
    }
    (0..n)
        .map(|t| {
            if prototypes.contains(&t) {
                0.0
            } else {
                prototypes
                    .iter()
                    .map(|&p| b[p][t].max(0.0))
                    .fold(f64::INFINITY, f64::min)
            }
        })
        .collect()
}

#[test]
fn costs_equal_bottleneck_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..60 {
        let n = rng.random_range(4..=12);
        let classes = rng.random_range(2..=4);
        let samples = random_samples(&mut rng, n, 5, classes);
        for id in DistanceId::all() {
            let g = TrainingGraph::new(samples.clone(), id).unwrap();
            let f = train(&g).unwrap();
            let oracle = bottleneck_costs(&g, f.prototypes());
            assert_eq!(f.costs(), oracle.as_slice(), "{id}");
            assert!(f.costs().iter().all(|&c| c >= 0.0));
            // every node hangs off a prototype carrying its root label
            for t in 0..n {
                let r = f.root_of(t);
                assert!(f.prototypes().contains(&r));
                assert_eq!(f.root_labels()[t], f.samples()[r].label);
            }
        }
    }
}

/// Kruskal with union-find; prototypes are endpoints of MST edges whose
/// labels differ.
fn kruskal_prototypes(g: &TrainingGraph) -> Vec<usize> {
    let n = g.len();
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            edges.push((g.weight(i, j), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    let mut protos = Vec::new();
    for (_, i, j) in edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri == rj {
            continue;
        }
        parent[ri] = rj;
        if g.samples()[i].label != g.samples()[j].label {
            protos.extend([i, j]);
        }
    }
    protos.sort_unstable();
    protos.dedup();
    protos
}

#[test]
fn prototypes_match_kruskal() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let n = rng.random_range(4..=30);
        let samples = random_samples(&mut rng, n, 4, 3);
        for id in [
            DistanceId::Euclidean,
            DistanceId::Manhattan,
            DistanceId::Chebyshev,
            DistanceId::Canberra,
        ] {
            let g = TrainingGraph::new(samples.clone(), id).unwrap();
            let mut got = find_prototypes(&g).unwrap();
            got.sort_unstable();
            assert_eq!(got, kruskal_prototypes(&g), "{id}");
        }
    }
}

#[test]
fn early_exit_equals_full_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let samples = random_samples(&mut rng, 25, 3, 3);
        for id in DistanceId::all() {
            let f = train(&TrainingGraph::new(samples.clone(), id).unwrap()).unwrap();
            for _ in 0..10 {
                let q = FeatureVector::new((0..3).map(|_| rng.random_range(-0.5..1.5)).collect()).unwrap();
                let fast = f.classify(&q).unwrap();
                let full = f.classify_full_scan(&q).unwrap();
                assert_eq!(fast, full, "{id}");
                // the rule itself, with ties to the first node in scan order
                let mut best = (f64::INFINITY, usize::MAX);
                for &s in f.ordered_nodes() {
                    let offer = f.costs()[s].max(id.eval(f.samples()[s].features.values(), q.values()));
                    if offer < best.0 {
                        best = (offer, s);
                    }
                }
                assert_eq!((fast.cost, fast.conqueror), best);
                assert_eq!(fast.label, f.root_labels()[best.1]);
            }
        }
    }
}

/// Three label-separated layouts; different distances need different ones
/// before every inter-class value exceeds every intra-class value.
fn layouts(rng: &mut ChaCha8Rng) -> Vec<Vec<Sample>> {
    let mut build = |f: &mut dyn FnMut(&mut ChaCha8Rng, u32) -> Vec<f64>| {
        let mut out = Vec::new();
        for c in 0..3u32 {
            for _ in 0..12 {
                let id = out.len();
                out.push(Sample::new(FeatureVector::new(f(rng, c)).unwrap(), c as Label, id));
            }
        }
        out
    };
    vec![
        build(&mut |r, c| {
            (0..3)
                .map(|_| 1.0 + 10.0 * c as f64 + r.random_range(0.0..0.5))
                .collect()
        }),
        build(&mut |r, c| {
            (0..3)
                .map(|_| 0.1 + 0.3 * c as f64 + r.random_range(0.0..0.02))
                .collect()
        }),
        // two coordinates fixed per class, one free: Hamming separates these
        build(&mut |r, c| vec![c as f64, c as f64 + 0.5, 5.0 * c as f64 + r.random_range(0.0..1.0)]),
    ]
}

fn label_separated(id: DistanceId, samples: &[Sample]) -> bool {
    let (mut intra, mut inter) = (f64::NEG_INFINITY, f64::INFINITY);
    for a in samples {
        for b in samples.iter().filter(|b| b.id != a.id) {
            let d = id.eval(a.features.values(), b.features.values());
            if a.label == b.label {
                intra = intra.max(d);
            } else {
                inter = inter.min(d);
            }
        }
    }
    inter > intra
}

#[test]
fn separable_training_set_is_learned_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let layouts = layouts(&mut rng);
    let mut checked = 0;
    for id in DistanceId::all().filter(|d| d.info().satisfies_identity) {
        // D33 and D47 change sign when their arguments swap, so no layout
        // can put every inter-class value above every intra-class one.
        let Some(samples) = layouts.iter().find(|s| label_separated(id, s)) else {
            assert!(matches!(id.number(), 33 | 47), "{id} has no separated layout");
            continue;
        };
        let f = train(&TrainingGraph::new(samples.clone(), id).unwrap()).unwrap();
        for s in samples {
            assert_eq!(f.classify(&s.features).unwrap().label, s.label, "{id}");
        }
        checked += 1;
    }
    assert_eq!(
        checked,
        DistanceId::all().filter(|d| d.info().satisfies_identity).count() - 2
    );
}

#[test]
fn cached_weights_change_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let samples = random_samples(&mut rng, 40, 4, 3);
    for id in DistanceId::all() {
        let g = TrainingGraph::new(samples.clone(), id).unwrap();
        let cached = train_with(&g, TrainOptions { cache_distances: true }).unwrap();
        assert_eq!(train(&g).unwrap(), cached);
    }
}

#[test]
fn ordered_nodes_are_a_permutation_with_nondecreasing_cost() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let samples = random_samples(&mut rng, 50, 2, 2);
    let f = train(&TrainingGraph::new(samples, DistanceId::Euclidean).unwrap()).unwrap();
    let mut seen = f.ordered_nodes().to_vec();
    seen.sort_unstable();
    assert_eq!(seen, (0..50).collect::<Vec<_>>());
    let costs: Vec<f64> = f.ordered_nodes().iter().map(|&s| f.costs()[s]).collect();
    assert!(costs.windows(2).all(|w| w[0] <= w[1]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn training_is_deterministic(seed in any::<u64>(), n in 2usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = random_samples(&mut rng, n, 3, 2);
        let g = TrainingGraph::new(samples, DistanceId::Euclidean).unwrap();
        prop_assert_eq!(train(&g).unwrap(), train(&g).unwrap());
    }
}
