//! Supervised optimum-path forest.
//!
//! Training samples form an implicit complete graph whose arc weights are the
//! chosen distance. Prototypes are the endpoints of minimum-spanning-tree
//! edges joining different classes. Training then lets the prototypes compete
//! for every other node under the path cost `f_max` (maximum arc weight along
//! the path, zero at a prototype), producing a cost map, a predecessor map and
//! the label each node inherits from its root. A query is labelled by the
//! training node `s` minimizing `max(C(s), d(s, query))`.
//!
//! Arc weights are always evaluated as `d(s, t)` with `s` the node already in
//! the tree and `t` the node being reached, which fixes the direction for the
//! asymmetric measures.

mod prototypes;

use thiserror::Error;

use crate::distances::{DistanceError, DistanceId, FeatureVector};

pub use prototypes::find_prototypes;

pub type Label = u32;
pub type NodeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForestError {
    #[error("SingleClass: training needs at least two distinct labels")]
    SingleClass,
    #[error("training needs at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("dimension mismatch: forest has {expected} features, query has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("training samples have inconsistent dimensions ({expected} vs {found} at sample {index})")]
    RaggedSamples {
        expected: usize,
        found: usize,
        index: usize,
    },
    #[error("inconsistent forest: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Distance(#[from] DistanceError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: FeatureVector,
    pub label: Label,
    /// Stable index of the sample in its source dataset.
    pub id: usize,
}

impl Sample {
    pub fn new(features: FeatureVector, label: Label, id: usize) -> Self {
        Sample { features, label, id }
    }
}

/// Training set plus the distance that weights its (implicit) complete graph.
#[derive(Debug, Clone)]
pub struct TrainingGraph {
    samples: Vec<Sample>,
    distance: DistanceId,
}

impl TrainingGraph {
    pub fn new(samples: Vec<Sample>, distance: DistanceId) -> Result<Self, ForestError> {
        if samples.len() < 2 {
            return Err(ForestError::TooFewSamples(samples.len()));
        }
        let dim = samples[0].features.dim();
        if let Some((index, s)) = samples.iter().enumerate().find(|(_, s)| s.features.dim() != dim) {
            return Err(ForestError::RaggedSamples {
                expected: dim,
                found: s.features.dim(),
                index,
            });
        }
        let first = samples[0].label;
        if samples.iter().all(|s| s.label == first) {
            return Err(ForestError::SingleClass);
        }
        Ok(TrainingGraph { samples, distance })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn distance(&self) -> DistanceId {
        self.distance
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].features.dim()
    }

    /// Weight of arc `(s, t)`.
    #[inline]
    pub fn weight(&self, s: NodeId, t: NodeId) -> f64 {
        self.distance
            .eval(self.samples[s].features.values(), self.samples[t].features.values())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrainOptions {
    /// Precompute the full `n x n` arc-weight matrix (`8n²` bytes) instead of
    /// evaluating weights on demand.
    pub cache_distances: bool,
}

/// A trained optimum-path forest. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedForest {
    pub(crate) samples: Vec<Sample>,
    pub(crate) distance: DistanceId,
    pub(crate) prototypes: Vec<NodeId>,
    pub(crate) cost: Vec<f64>,
    pub(crate) predecessor: Vec<Option<NodeId>>,
    pub(crate) root_label: Vec<Label>,
    pub(crate) ordered_nodes: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    /// `min_s max(C(s), d(s, query))`.
    pub cost: f64,
    /// Training node attaining the minimum.
    pub conqueror: NodeId,
}

enum Weights<'a> {
    OnDemand(&'a TrainingGraph),
    Cached { n: usize, w: Vec<f64> },
}

impl Weights<'_> {
    fn new(graph: &TrainingGraph, cache: bool) -> Weights<'_> {
        if !cache {
            return Weights::OnDemand(graph);
        }
        let n = graph.len();
        let mut w = Vec::with_capacity(n * n);
        for s in 0..n {
            for t in 0..n {
                w.push(graph.weight(s, t));
            }
        }
        Weights::Cached { n, w }
    }

    #[inline]
    fn get(&self, s: NodeId, t: NodeId) -> f64 {
        match self {
            Weights::OnDemand(g) => g.weight(s, t),
            Weights::Cached { n, w } => w[s * n + t],
        }
    }
}

/// Trains with weights evaluated on demand.
pub fn train(graph: &TrainingGraph) -> Result<TrainedForest, ForestError> {
    train_with(graph, TrainOptions::default())
}

pub fn train_with(graph: &TrainingGraph, options: TrainOptions) -> Result<TrainedForest, ForestError> {
    let weights = Weights::new(graph, options.cache_distances);
    let prototypes = prototypes::mst_prototypes(graph, |s, t| weights.get(s, t))?;
    Ok(conquer(graph, prototypes, |s, t| weights.get(s, t)))
}

/// Competition of the prototypes for the remaining nodes.
///
/// The queue is an `in_queue` flag per node scanned linearly for the minimum
/// cost (lowest id on ties): `O(n²)` comparisons alongside the `O(n²)` arc
/// evaluations the relaxation needs anyway.
fn conquer(graph: &TrainingGraph, prototypes: Vec<NodeId>, weight: impl Fn(NodeId, NodeId) -> f64) -> TrainedForest {
    let n = graph.len();
    let samples = graph.samples();
    let mut cost = vec![f64::INFINITY; n];
    let mut predecessor = vec![None; n];
    let mut root_label: Vec<Label> = samples.iter().map(|s| s.label).collect();
    let mut in_queue = vec![false; n];
    let mut ordered_nodes = Vec::with_capacity(n);

    for &p in &prototypes {
        cost[p] = 0.0;
        in_queue[p] = true;
    }

    loop {
        let mut next: Option<NodeId> = None;
        for t in 0..n {
            if in_queue[t] && next.is_none_or(|b| cost[t] < cost[b]) {
                next = Some(t);
            }
        }
        let Some(s) = next else { break };
        in_queue[s] = false;
        ordered_nodes.push(s);

        for t in 0..n {
            if t == s || cost[t] <= cost[s] {
                continue;
            }
            let c = cost[s].max(weight(s, t));
            if c < cost[t] {
                cost[t] = c;
                predecessor[t] = Some(s);
                root_label[t] = root_label[s];
                in_queue[t] = true;
            }
        }
    }

    TrainedForest {
        samples: samples.to_vec(),
        distance: graph.distance(),
        prototypes,
        cost,
        predecessor,
        root_label,
        ordered_nodes,
    }
}

impl TrainedForest {
    /// Reassembles a forest from its parts, checking structural consistency.
    pub fn from_parts(
        samples: Vec<Sample>,
        distance: DistanceId,
        prototypes: Vec<NodeId>,
        cost: Vec<f64>,
        predecessor: Vec<Option<NodeId>>,
        root_label: Vec<Label>,
        ordered_nodes: Vec<NodeId>,
    ) -> Result<Self, ForestError> {
        let n = samples.len();
        let bad = |m: &str| Err(ForestError::Inconsistent(m.to_string()));
        if n == 0 {
            return bad("no samples");
        }
        if cost.len() != n || predecessor.len() != n || root_label.len() != n || ordered_nodes.len() != n {
            return bad("per-node maps differ in length");
        }
        let dim = samples[0].features.dim();
        if samples.iter().any(|s| s.features.dim() != dim) {
            return bad("samples differ in dimension");
        }
        let mut seen = vec![false; n];
        for &v in &ordered_nodes {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return bad("ordered nodes are not a permutation");
            }
        }
        if prototypes.is_empty() || prototypes.iter().any(|&p| p >= n || predecessor[p].is_some()) {
            return bad("invalid prototype set");
        }
        if predecessor.iter().flatten().any(|&p| p >= n) {
            return bad("predecessor out of range");
        }
        Ok(TrainedForest {
            samples,
            distance,
            prototypes,
            cost,
            predecessor,
            root_label,
            ordered_nodes,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn distance(&self) -> DistanceId {
        self.distance
    }

    pub fn prototypes(&self) -> &[NodeId] {
        &self.prototypes
    }

    pub fn costs(&self) -> &[f64] {
        &self.cost
    }

    pub fn predecessors(&self) -> &[Option<NodeId>] {
        &self.predecessor
    }

    pub fn root_labels(&self) -> &[Label] {
        &self.root_label
    }

    /// Nodes in the order they left the priority queue (non-decreasing cost).
    pub fn ordered_nodes(&self) -> &[NodeId] {
        &self.ordered_nodes
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].features.dim()
    }

    /// Follows predecessors from `node` to the root of its tree.
    pub fn root_of(&self, mut node: NodeId) -> NodeId {
        while let Some(p) = self.predecessor[node] {
            node = p;
        }
        node
    }

    /// Labels `query` with the early-exit scan over `ordered_nodes`: once a
    /// node's cost reaches the best offer so far, no later node can beat it.
    /// Ties go to the first node in scan order.
    pub fn classify(&self, query: &FeatureVector) -> Result<Prediction, ForestError> {
        self.check_dim(query)?;
        Ok(self.scan(query.values(), true))
    }

    /// Same result as [`classify`](Self::classify) but without early exit.
    pub fn classify_full_scan(&self, query: &FeatureVector) -> Result<Prediction, ForestError> {
        self.check_dim(query)?;
        Ok(self.scan(query.values(), false))
    }

    pub fn classify_batch(&self, queries: &[FeatureVector]) -> Result<Vec<Prediction>, ForestError> {
        queries.iter().map(|q| self.classify(q)).collect()
    }

    fn check_dim(&self, query: &FeatureVector) -> Result<(), ForestError> {
        if query.dim() != self.dim() {
            return Err(ForestError::DimensionMismatch {
                expected: self.dim(),
                found: query.dim(),
            });
        }
        Ok(())
    }

    fn scan(&self, query: &[f64], early_exit: bool) -> Prediction {
        let mut best = f64::INFINITY;
        let mut conqueror = self.ordered_nodes[0];
        for &s in &self.ordered_nodes {
            if early_exit && self.cost[s] >= best {
                break;
            }
            let offer = self.cost[s].max(self.distance.eval(self.samples[s].features.values(), query));
            if offer < best {
                best = offer;
                conqueror = s;
            }
        }
        Prediction {
            label: self.root_label[conqueror],
            cost: best,
            conqueror,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn line(points: &[(f64, Label)]) -> Vec<Sample> {
        points
            .iter()
            .enumerate()
            .map(|(i, &(x, l))| Sample::new(FeatureVector::new(vec![x]).unwrap(), l, i))
            .collect()
    }

    fn four_points() -> TrainedForest {
        let g = TrainingGraph::new(line(&[(0.0, 0), (1.0, 0), (3.0, 1), (4.0, 1)]), DistanceId::Euclidean).unwrap();
        train(&g).unwrap()
    }

    fn q(x: f64) -> FeatureVector {
        FeatureVector::new(vec![x]).unwrap()
    }

    #[test]
    fn four_point_training() {
        let f = four_points();
        assert_eq!(f.prototypes(), &[1, 2]);
        assert_eq!(f.costs(), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(f.predecessors(), &[Some(1), None, None, Some(2)]);
        assert_eq!(f.root_labels(), &[0, 0, 1, 1]);
        assert_eq!(f.ordered_nodes(), &[1, 2, 0, 3]);
    }

    #[test]
    fn four_point_classification() {
        let f = four_points();
        let p = f.classify(&q(1.9)).unwrap();
        assert_eq!(p.label, 0);
        assert_eq!(p.conqueror, 1);
        assert!((p.cost - 0.9).abs() < 1e-12);

        // Nodes 3.0 (C=0, d=1) and 4.0 (C=1, d=0) both offer cost 1; the
        // prototype comes first in scan order.
        let p = f.classify(&q(4.0)).unwrap();
        assert_eq!(p.label, 1);
        assert_eq!(p.conqueror, 2);
        assert_eq!(p.cost, 1.0);
    }

    #[test]
    fn query_on_prototype_costs_zero() {
        let f = four_points();
        let p = f.classify(&q(3.0)).unwrap();
        assert_eq!((p.label, p.cost, p.conqueror), (1, 0.0, 2));
    }

    #[test]
    fn two_samples_are_both_prototypes() {
        let g = TrainingGraph::new(line(&[(0.0, 0), (5.0, 1)]), DistanceId::Euclidean).unwrap();
        let f = train(&g).unwrap();
        assert_eq!(f.prototypes(), &[0, 1]);
        assert_eq!(f.costs(), &[0.0, 0.0]);
        assert_eq!(f.ordered_nodes(), &[0, 1]);
    }

    #[test]
    fn alternating_labels_make_every_node_a_prototype() {
        let g = TrainingGraph::new(line(&[(0.0, 0), (1.0, 1), (2.0, 0), (3.0, 1)]), DistanceId::Manhattan).unwrap();
        let f = train(&g).unwrap();
        assert_eq!(f.prototypes().len(), 4);
        assert!(f.costs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn graph_validation() {
        assert_eq!(
            TrainingGraph::new(line(&[(0.0, 0), (1.0, 0)]), DistanceId::Euclidean).unwrap_err(),
            ForestError::SingleClass
        );
        assert_eq!(
            TrainingGraph::new(line(&[(0.0, 0)]), DistanceId::Euclidean).unwrap_err(),
            ForestError::TooFewSamples(1)
        );
        let mut s = line(&[(0.0, 0), (1.0, 1)]);
        s[1].features = FeatureVector::new(vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            TrainingGraph::new(s, DistanceId::Euclidean),
            Err(ForestError::RaggedSamples { index: 1, .. })
        ));
    }

    #[test]
    fn classify_dimension_mismatch() {
        let f = four_points();
        let err = f.classify(&FeatureVector::new(vec![1.0, 2.0]).unwrap()).unwrap_err();
        assert_eq!(err, ForestError::DimensionMismatch { expected: 1, found: 2 });
        assert!(f
            .classify_batch(&[q(0.0), FeatureVector::new(vec![1.0, 1.0]).unwrap()])
            .is_err());
    }

    #[test]
    fn batch_matches_single() {
        let f = four_points();
        assert!(f.classify_batch(&[]).unwrap().is_empty());
        let batch = f.classify_batch(&[q(1.9), q(4.0)]).unwrap();
        assert_eq!(batch[0], f.classify(&q(1.9)).unwrap());
        assert_eq!(batch[1], f.classify(&q(4.0)).unwrap());
    }

    #[test]
    fn cached_weights_give_identical_forest() {
        let g = TrainingGraph::new(
            line(&[(0.3, 0), (1.2, 0), (2.9, 1), (4.4, 1), (2.0, 2), (0.1, 2)]),
            DistanceId::Canberra,
        )
        .unwrap();
        let a = train(&g).unwrap();
        let b = train_with(&g, TrainOptions { cache_distances: true }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn from_parts_rejects_inconsistency() {
        let f = four_points();
        let mut ordered = f.ordered_nodes.clone();
        ordered[0] = ordered[1];
        assert!(TrainedForest::from_parts(
            f.samples.clone(),
            f.distance,
            f.prototypes.clone(),
            f.cost.clone(),
            f.predecessor.clone(),
            f.root_label.clone(),
            ordered,
        )
        .is_err());
        let rebuilt = TrainedForest::from_parts(
            f.samples.clone(),
            f.distance,
            f.prototypes.clone(),
            f.cost.clone(),
            f.predecessor.clone(),
            f.root_label.clone(),
            f.ordered_nodes.clone(),
        )
        .unwrap();
        assert_eq!(rebuilt, f);
    }
}
