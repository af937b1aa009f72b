//! Greedy packings of vertex-disjoint shortest paths near a ball.
//!
//! Any hitting set for the shortest paths of length in `(r/2, r]` that meet
//! `B(u, r)` must contain one node of each path in a disjoint packing, so
//! the packing size is a lower bound on the highway dimension.
//!
//! Candidates come from shortest-path trees rooted at nodes of the ball: for
//! each tree node whose distance first exceeds `r/2` along its branch, the
//! tree path to it is a candidate when its length is at most `r`. The
//! greedy pass takes candidates with fewest vertices first; restarts shuffle
//! the order among equal sizes. Every result is checked by
//! [`verify_packing`] before it is returned.

use std::collections::HashSet;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, Metric, NodeId};
use crate::grid::{generate_grid, GridSpec};
use crate::skeleton::{skeleton_dimension, RootSelection, SkeletonParams};
use crate::spt::{ball, bounded_distances, distances_from, shortest_path_tree};

pub const MAX_SOURCES: usize = 200;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackingResult {
    pub center: NodeId,
    pub radius: u64,
    /// Node sequences of the selected paths.
    pub paths: Vec<Vec<NodeId>>,
}

impl PackingResult {
    pub fn size(&self) -> usize {
        self.paths.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum PackingViolation {
    #[error("path {0} is not a walk along graph edges")]
    NotAPath(usize),
    #[error("path {index} has length {length}, shortest is {shortest}")]
    NotShortest {
        index: usize,
        length: u64,
        shortest: u64,
    },
    #[error("path {index} has length {length} outside (r/2, r]")]
    OutOfWindow { index: usize, length: u64 },
    #[error("path {0} misses the ball")]
    MissesBall(usize),
    #[error("paths {0} and {1} share node {2}")]
    Overlap(usize, usize, NodeId),
}

fn path_length(g: &Graph, path: &[NodeId]) -> Option<u64> {
    path.windows(2)
        .map(|w| g.find_edge(w[0], w[1]).map(|e| g.length(e, Metric::Time)))
        .sum()
}

/// Checks disjointness, shortestness, the length window and ball
/// intersection of every path.
pub fn verify_packing(g: &Graph, p: &PackingResult) -> std::result::Result<(), PackingViolation> {
    let in_ball = bounded_distances(g, p.center, Metric::Time, p.radius);
    let mut owner: Vec<Option<usize>> = vec![None; g.n()];
    for (i, path) in p.paths.iter().enumerate() {
        if path.len() < 2 || path.iter().any(|&v| v as usize >= g.n()) {
            return Err(PackingViolation::NotAPath(i));
        }
        let length = path_length(g, path).ok_or(PackingViolation::NotAPath(i))?;
        let shortest = distances_from(g, path[0], Metric::Time)[*path.last().unwrap() as usize];
        if shortest != length {
            return Err(PackingViolation::NotShortest {
                index: i,
                length,
                shortest,
            });
        }
        if 2 * length <= p.radius || length > p.radius {
            return Err(PackingViolation::OutOfWindow { index: i, length });
        }
        if !path.iter().any(|&v| in_ball[v as usize].is_some()) {
            return Err(PackingViolation::MissesBall(i));
        }
        for &v in path {
            if let Some(j) = owner[v as usize] {
                return Err(PackingViolation::Overlap(j, i, v));
            }
            owner[v as usize] = Some(i);
        }
    }
    Ok(())
}

/// Candidate paths from the trees of up to [`MAX_SOURCES`] ball members.
fn candidates(g: &Graph, members: &[NodeId], r: u64, seed: u64) -> Result<Vec<Vec<NodeId>>> {
    let mut sources = members.to_vec();
    if sources.len() > MAX_SOURCES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sources.shuffle(&mut rng);
        sources.truncate(MAX_SOURCES);
        sources.sort_unstable();
    }
    let per_source = sources
        .par_iter()
        .map(|&s| {
            let tree = shortest_path_tree(g, s, Metric::Time)?;
            let mut out = Vec::new();
            for &t in tree.order() {
                let Some((parent, _)) = tree.parent(t) else { continue };
                let (d, dp) = (tree.dist(t), tree.dist(parent));
                if 2 * d > r && 2 * dp <= r && d <= r {
                    out.push(tree.path_nodes(t));
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut seen = HashSet::new();
    let mut all = Vec::new();
    for mut path in per_source.into_iter().flatten() {
        if path.last() < path.first() {
            path.reverse();
        }
        if seen.insert(path.clone()) {
            all.push(path);
        }
    }
    Ok(all)
}

fn greedy(order: &[usize], pool: &[Vec<NodeId>], n: usize) -> Vec<usize> {
    let mut used = vec![false; n];
    let mut picked = Vec::new();
    for &i in order {
        if pool[i].iter().all(|&v| !used[v as usize]) {
            for &v in &pool[i] {
                used[v as usize] = true;
            }
            picked.push(i);
        }
    }
    picked
}

/// Largest packing found within `budget` greedy passes (at least one).
pub fn pack_paths(g: &Graph, center: NodeId, radius: u64, budget: usize, seed: u64) -> Result<PackingResult> {
    if radius == 0 {
        return Err(Error::Parameter("packing radius must be at least 1".into()));
    }
    let members = ball(g, center, radius, Metric::Time)?.members;
    let pool = candidates(g, &members, radius, seed)?;
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by_key(|&i| (pool[i].len(), i));
    let mut best = greedy(&order, &pool, g.n());
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    for _ in 1..budget.max(1) {
        order.shuffle(&mut rng);
        order.sort_by_key(|&i| pool[i].len());
        let picked = greedy(&order, &pool, g.n());
        if picked.len() > best.len() {
            best = picked;
        }
    }
    best.sort_unstable();
    let result = PackingResult {
        center,
        radius,
        paths: best.into_iter().map(|i| pool[i].clone()).collect(),
    };
    if let Err(v) = verify_packing(g, &result) {
        panic!("packing heuristic produced an invalid packing: {v}");
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeparationRow {
    pub level: u32,
    pub n: usize,
    pub k: u32,
    pub pack_lb: usize,
}

pub const SEPARATION_CSV_HEADER: &str = "L,n,k,pack_lb";

/// Exact skeleton dimension and corner-ball packing bound of `G_L` for
/// each level in `lmin..=lmax`.
pub fn separation_study(lmin: u32, lmax: u32, budget: usize, seed: u64) -> Result<Vec<SeparationRow>> {
    if lmin > lmax {
        return Err(Error::Parameter(format!("empty level range {lmin}..={lmax}")));
    }
    (lmin..=lmax)
        .map(|level| {
            let spec = GridSpec::new(level)?;
            let g = generate_grid(level)?;
            let k = skeleton_dimension(&g, &RootSelection::All, SkeletonParams::default(), None)?.k;
            let corner = spec.node(1, 1);
            let pack = pack_paths(&g, corner, spec.corner_radius(), budget, seed)?;
            Ok(SeparationRow {
                level,
                n: g.n(),
                k,
                pack_lb: pack.size(),
            })
        })
        .collect()
}

pub fn write_separation_csv<W: Write>(rows: &[SeparationRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SEPARATION_CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.level, r.n, r.k, r.pack_lb)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::path;

    #[test]
    fn path_packing_has_a_path() {
        let g = path(41).unwrap();
        let p = pack_paths(&g, 20, 10, 4, 0).unwrap();
        assert!(p.size() >= 1);
        assert!(verify_packing(&g, &p).is_ok());
    }

    #[test]
    fn verifier_rejects_bad_packings() {
        let g = path(10).unwrap();
        let ok = PackingResult { center: 0, radius: 4, paths: vec![vec![0, 1, 2, 3]] };
        assert!(verify_packing(&g, &ok).is_ok());
        let short = PackingResult { paths: vec![vec![0, 1]], ..ok.clone() };
        assert!(matches!(verify_packing(&g, &short), Err(PackingViolation::OutOfWindow { .. })));
        let far = PackingResult { paths: vec![vec![6, 7, 8, 9]], ..ok.clone() };
        assert_eq!(verify_packing(&g, &far), Err(PackingViolation::MissesBall(0)));
        let gap = PackingResult { paths: vec![vec![0, 2, 3]], ..ok.clone() };
        assert_eq!(verify_packing(&g, &gap), Err(PackingViolation::NotAPath(0)));
        let twice = PackingResult { paths: vec![vec![0, 1, 2], vec![2, 3, 4]], radius: 3, ..ok };
        assert_eq!(verify_packing(&g, &twice), Err(PackingViolation::Overlap(0, 1, 2)));
    }

    #[test]
    fn removing_a_path_keeps_a_valid_packing() {
        let g = generate_grid(3).unwrap();
        let spec = GridSpec::new(3).unwrap();
        let p = pack_paths(&g, 0, spec.corner_radius(), 3, 1).unwrap();
        for i in 0..p.size() {
            let mut q = p.clone();
            q.paths.remove(i);
            assert!(verify_packing(&g, &q).is_ok());
        }
    }
}
