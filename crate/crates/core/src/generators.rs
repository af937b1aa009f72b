//! Small deterministic graph families used by tests, studies and the CLI.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

pub fn path(n: usize) -> Result<Graph> {
    Graph::from_edges(n, (1..n as NodeId).map(|i| (i - 1, i, 1)))
}

/// `K_{1,m}` with the center at node 0.
pub fn star(m: usize) -> Result<Graph> {
    Graph::from_edges(m + 1, (1..=m as NodeId).map(|i| (0, i, 1)))
}

pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::Parameter(format!("a cycle needs at least 3 nodes, got {n}")));
    }
    let n32 = n as NodeId;
    Graph::from_edges(n, (0..n32).map(|i| (i, (i + 1) % n32, 1)))
}

/// Random connected graph: a random recursive spanning tree plus
/// `extra` random chords, lengths uniform in `1..=max_len`.
pub fn random_connected(n: usize, extra: usize, max_len: u64, seed: u64) -> Result<Graph> {
    if n == 0 || max_len == 0 {
        return Err(Error::Parameter("need n >= 1 and max_len >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(n + extra);
    for v in 1..n as NodeId {
        let u = rng.gen_range(0..v);
        edges.push((u, v, rng.gen_range(1..=max_len)));
    }
    if n > 1 {
        for _ in 0..extra {
            let u = rng.gen_range(0..n as NodeId);
            let v = rng.gen_range(0..n as NodeId);
            edges.push((u, v, rng.gen_range(1..=max_len)));
        }
    }
    Graph::from_edges(n, edges)
}

/// Unit-length graph with a long backbone: nodes in a random order along a
/// path, plus chords between nodes at most `span` apart on it. Diameter
/// stays around `n / span`.
pub fn random_banded(n: usize, chords: usize, span: usize, seed: u64) -> Result<Graph> {
    if n == 0 || span == 0 {
        return Err(Error::Parameter("need n >= 1 and span >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<NodeId> = (0..n as NodeId).collect();
    order.shuffle(&mut rng);
    let mut edges: Vec<(NodeId, NodeId, u64)> =
        order.windows(2).map(|w| (w[0], w[1], 1)).collect();
    if n > 2 {
        for _ in 0..chords {
            let i = rng.gen_range(0..n - 1);
            let j = (i + rng.gen_range(1..=span)).min(n - 1);
            edges.push((order[i], order[j], 1));
        }
    }
    Graph::from_edges(n, edges)
}

/// Random unit-length graph built like [`random_connected`].
pub fn random_unweighted(n: usize, extra: usize, seed: u64) -> Result<Graph> {
    random_connected(n, extra, 1, seed)
}

/// Named graphs shared by the test suites: simple families plus a few
/// random weighted and unweighted instances.
pub fn corpus() -> Vec<(String, Graph)> {
    let mut out = vec![
        ("path5".to_string(), path(5).unwrap()),
        ("path17".to_string(), path(17).unwrap()),
        ("star4".to_string(), star(4).unwrap()),
        ("star7".to_string(), star(7).unwrap()),
        ("cycle12".to_string(), cycle(12).unwrap()),
        ("cycle31".to_string(), cycle(31).unwrap()),
        ("grid1".to_string(), crate::grid::generate_grid(1).unwrap()),
    ];
    for seed in 0..6 {
        let n = 20 + 10 * seed as usize;
        out.push((
            format!("random{n}w{seed}"),
            random_connected(n, n / 2, 20, seed).unwrap(),
        ));
        out.push((
            format!("random{n}u{seed}"),
            random_unweighted(n, n / 3, 100 + seed).unwrap(),
        ));
    }
    out.push(("banded60".to_string(), random_banded(60, 20, 3, 7).unwrap()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Metric;

    #[test]
    fn families_have_expected_sizes() {
        assert_eq!(path(5).unwrap().m(), 4);
        assert_eq!(star(4).unwrap().degree(0), 4);
        assert_eq!(cycle(6).unwrap().m(), 6);
        assert!(cycle(2).is_err());
    }

    #[test]
    fn random_graphs_are_deterministic() {
        let a = random_connected(40, 20, 20, 3).unwrap();
        let b = random_connected(40, 20, 20, 3).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        assert!((0..a.m() as u32).all(|e| (1..=20).contains(&a.length(e, Metric::Time))));
        let c = random_banded(200, 50, 3, 1).unwrap();
        assert_eq!(c.n(), 200);
    }

    #[test]
    fn corpus_names_are_unique() {
        let c = corpus();
        let mut names: Vec<_> = c.iter().map(|x| x.0.clone()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), c.len());
    }
}
