//! Shortest-path trees with a strict total order on paths.
//!
//! Paths are compared by `(sum of lengths, sum of per-edge tiebreak keys)`
//! with both sums accumulated exactly. Since both components are additive
//! and symmetric, the resulting shortest path between two nodes is unique
//! and the same seen from either endpoint. A final smallest-edge-id rule
//! only makes the construction deterministic in the (astronomically rare)
//! event of a full collision.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};

use crate::error::Result;
use crate::graph::{EdgeId, Graph, Metric, NodeId};

const NONE: u32 = u32::MAX;

/// Path weight under the perturbed order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PerturbedLength {
    pub base: u64,
    pub tiebreak: u128,
}

impl PerturbedLength {
    pub const ZERO: Self = PerturbedLength { base: 0, tiebreak: 0 };

    pub fn extend(self, g: &Graph, e: EdgeId, metric: Metric) -> Self {
        PerturbedLength {
            base: self.base + g.length(e, metric),
            tiebreak: self.tiebreak + g.tiebreak_key(e) as u128,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ShortestPathTree {
    root: NodeId,
    metric: Metric,
    parent: Vec<NodeId>,
    parent_edge: Vec<EdgeId>,
    dist: Vec<u64>,
    reach: Vec<u64>,
    order: Vec<NodeId>,
    child_offsets: Vec<u32>,
    children: Vec<NodeId>,
}

impl ShortestPathTree {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    #[inline]
    pub fn dist(&self, v: NodeId) -> u64 {
        self.dist[v as usize]
    }

    pub fn dists(&self) -> &[u64] {
        &self.dist
    }

    /// Largest distance from `v` to one of its descendants.
    #[inline]
    pub fn reach(&self, v: NodeId) -> u64 {
        self.reach[v as usize]
    }

    #[inline]
    pub fn parent(&self, v: NodeId) -> Option<(NodeId, EdgeId)> {
        let p = self.parent[v as usize];
        (p != NONE).then(|| (p, self.parent_edge[v as usize]))
    }

    /// Nodes in settle order: non-decreasing distance, parents before children.
    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        let v = v as usize;
        &self.children[self.child_offsets[v] as usize..self.child_offsets[v + 1] as usize]
    }

    /// Edges of the tree path from the root to `v`, root side first.
    pub fn path_edges(&self, v: NodeId) -> Vec<EdgeId> {
        let mut edges = Vec::new();
        let mut cur = v;
        while let Some((p, e)) = self.parent(cur) {
            edges.push(e);
            cur = p;
        }
        edges.reverse();
        edges
    }

    /// Nodes of the tree path from the root to `v`, inclusive.
    pub fn path_nodes(&self, v: NodeId) -> Vec<NodeId> {
        let mut nodes = vec![v];
        let mut cur = v;
        while let Some((p, _)) = self.parent(cur) {
            nodes.push(p);
            cur = p;
        }
        nodes.reverse();
        nodes
    }
}

/// Builds the tree of unique shortest paths from `root` under `metric`.
pub fn shortest_path_tree(g: &Graph, root: NodeId, metric: Metric) -> Result<ShortestPathTree> {
    g.require_metric(metric)?;
    g.check_node(root as u64)?;
    let n = g.n();
    let mut label: Vec<Option<PerturbedLength>> = vec![None; n];
    let mut parent = vec![NONE; n];
    let mut parent_edge = vec![NONE; n];
    let mut settled = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::new();

    label[root as usize] = Some(PerturbedLength::ZERO);
    heap.push(Reverse((PerturbedLength::ZERO, root)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if settled[v as usize] || label[v as usize] != Some(d) {
            continue;
        }
        settled[v as usize] = true;
        order.push(v);
        for &(w, e) in g.neighbors(v) {
            if settled[w as usize] {
                continue;
            }
            let cand = d.extend(g, e, metric);
            match label[w as usize] {
                Some(cur) if cand > cur => {}
                Some(cur) if cand == cur => {
                    if e < parent_edge[w as usize] {
                        parent[w as usize] = v;
                        parent_edge[w as usize] = e;
                    }
                }
                _ => {
                    label[w as usize] = Some(cand);
                    parent[w as usize] = v;
                    parent_edge[w as usize] = e;
                    heap.push(Reverse((cand, w)));
                }
            }
        }
    }

    let dist: Vec<u64> = label
        .iter()
        .map(|l| l.expect("graph is connected").base)
        .collect();

    let mut child_offsets = vec![0u32; n + 1];
    for v in 0..n {
        if parent[v] != NONE {
            child_offsets[parent[v] as usize + 1] += 1;
        }
    }
    for i in 0..n {
        child_offsets[i + 1] += child_offsets[i];
    }
    let mut fill: Vec<u32> = child_offsets[..n].to_vec();
    let mut children = vec![0; n.saturating_sub(1)];
    // settle order keeps each child list sorted by distance
    for &v in &order {
        let p = parent[v as usize];
        if p != NONE {
            children[fill[p as usize] as usize] = v;
            fill[p as usize] += 1;
        }
    }

    let mut deepest = dist.clone();
    for &v in order.iter().rev() {
        let p = parent[v as usize];
        if p != NONE {
            let d = deepest[v as usize];
            if d > deepest[p as usize] {
                deepest[p as usize] = d;
            }
        }
    }
    let reach = deepest.iter().zip(&dist).map(|(d, r)| d - r).collect();

    Ok(ShortestPathTree {
        root,
        metric,
        parent,
        parent_edge,
        dist,
        reach,
        order,
        child_offsets,
        children,
    })
}

/// Plain Dijkstra distances under `metric`, no tie-breaking involved.
pub fn distances_from(g: &Graph, src: NodeId, metric: Metric) -> Vec<u64> {
    bounded_distances(g, src, metric, u64::MAX)
        .into_iter()
        .map(|d| d.expect("graph is connected"))
        .collect()
}

/// Dijkstra that stops once every node within `radius` is settled.
pub fn bounded_distances(g: &Graph, src: NodeId, metric: Metric, radius: u64) -> Vec<Option<u64>> {
    let mut dist: Vec<Option<u64>> = vec![None; g.n()];
    let mut heap = BinaryHeap::new();
    dist[src as usize] = Some(0);
    heap.push(Reverse((0u64, src)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if dist[v as usize] != Some(d) {
            continue;
        }
        if d > radius {
            break;
        }
        for &(w, e) in g.neighbors(v) {
            let cand = d + g.length(e, metric);
            if dist[w as usize].is_none_or(|cur| cand < cur) {
                dist[w as usize] = Some(cand);
                heap.push(Reverse((cand, w)));
            }
        }
    }
    for d in dist.iter_mut() {
        if d.is_some_and(|d| d > radius) {
            *d = None;
        }
    }
    dist
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub center: NodeId,
    pub radius: u64,
    /// Sorted node ids.
    pub members: Vec<NodeId>,
}

impl Ball {
    pub fn contains(&self, v: NodeId) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

pub fn ball(g: &Graph, center: NodeId, radius: u64, metric: Metric) -> Result<Ball> {
    g.require_metric(metric)?;
    g.check_node(center as u64)?;
    let members = bounded_distances(g, center, metric, radius)
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_some())
        .map(|(v, _)| v as NodeId)
        .collect();
    Ok(Ball {
        center,
        radius,
        members,
    })
}

#[derive(Clone, Debug, Default)]
pub struct SymmetryReport {
    pub pairs_checked: usize,
    pub violations: Vec<(NodeId, NodeId)>,
}

impl SymmetryReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that the path from `u` to `v` in `T_u` is the reverse of the path
/// from `v` to `u` in `T_v`, for every listed pair.
pub fn verify_path_symmetry(
    g: &Graph,
    pairs: &[(NodeId, NodeId)],
    metric: Metric,
) -> Result<SymmetryReport> {
    let mut trees: HashMap<NodeId, ShortestPathTree> = HashMap::new();
    let mut report = SymmetryReport::default();
    for &(u, v) in pairs {
        for x in [u, v] {
            if let Entry::Vacant(slot) = trees.entry(x) {
                slot.insert(shortest_path_tree(g, x, metric)?);
            }
        }
        let forward = trees[&u].path_edges(v);
        let mut backward = trees[&v].path_edges(u);
        backward.reverse();
        report.pairs_checked += 1;
        if forward != backward {
            report.violations.push((u, v));
        }
    }
    Ok(report)
}
