use super::{ForestError, NodeId, TrainingGraph};

/// Prototypes of `graph`: both endpoints of every minimum-spanning-tree edge
/// that joins samples of different classes. Returned ascending.
pub fn find_prototypes(graph: &TrainingGraph) -> Result<Vec<NodeId>, ForestError> {
    mst_prototypes(graph, |s, t| graph.weight(s, t))
}

pub(super) fn mst_prototypes(
    graph: &TrainingGraph,
    weight: impl Fn(NodeId, NodeId) -> f64,
) -> Result<Vec<NodeId>, ForestError> {
    let labels: Vec<_> = graph.samples().iter().map(|s| s.label).collect();
    let parent = prim(graph.len(), weight);

    let mut is_prototype = vec![false; graph.len()];
    for (v, p) in parent.iter().enumerate() {
        if let Some(u) = *p {
            if labels[u] != labels[v] {
                is_prototype[u] = true;
                is_prototype[v] = true;
            }
        }
    }
    let prototypes: Vec<_> = (0..graph.len()).filter(|&v| is_prototype[v]).collect();
    if prototypes.is_empty() {
        return Err(ForestError::SingleClass);
    }
    Ok(prototypes)
}

/// Dense Prim's algorithm from node 0. Arc `(u, v)` is weighed as
/// `weight(u, v)` with `u` already in the tree. Among equal keys the lowest
/// node id joins first, and a key is only replaced by a strictly smaller one.
fn prim(n: usize, weight: impl Fn(NodeId, NodeId) -> f64) -> Vec<Option<NodeId>> {
    let mut key = vec![f64::INFINITY; n];
    let mut parent = vec![None; n];
    let mut in_tree = vec![false; n];
    if n == 0 {
        return parent;
    }
    key[0] = f64::NEG_INFINITY;

    for _ in 0..n {
        let mut next: Option<NodeId> = None;
        for v in 0..n {
            if !in_tree[v] && next.is_none_or(|b| key[v] < key[b]) {
                next = Some(v);
            }
        }
        let Some(u) = next else { break };
        in_tree[u] = true;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let w = weight(u, v);
            if w < key[v] {
                key[v] = w;
                parent[v] = Some(u);
            }
        }
    }
    parent
}
