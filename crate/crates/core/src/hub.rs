//! Randomized edge-hub labeling.
//!
//! Every edge is virtually subdivided into `12 * length` unit edges carrying
//! shared random values (see [`crate::rho`]). For a pair `u != v` the hub
//! edge is the real edge containing the unit of minimum value inside the
//! central window of the `u`-`v` shortest path, between `5/12` and `7/12` of
//! its length. The window is symmetric and the path is the same from both
//! ends, so `u` and `v` pick the same hub; `S(u)` is the set of hubs over
//! all targets.
//!
//! A window either lies inside a single real edge (that edge is the hub) or
//! crosses at least one node, in which case every piece of it is a prefix,
//! a suffix or the whole of some edge's subdivision. Prefix and suffix
//! minima chains are therefore enough.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Metric, NodeId};
use crate::rho::{sample_minima_chain, MinimaChain, RhoValue};
use crate::skeleton::SUBDIVISION;
use crate::spt::{distances_from, shortest_path_tree, ShortestPathTree};

/// Minima chains of every edge for one seed and one metric.
#[derive(Clone, Debug)]
pub struct EdgeChains {
    seed: u64,
    metric: Metric,
    chains: Vec<MinimaChain>,
}

impl EdgeChains {
    pub fn new(g: &Graph, seed: u64, metric: Metric) -> Result<Self> {
        g.require_metric(metric)?;
        let chains = (0..g.m() as EdgeId)
            .into_par_iter()
            .map(|e| sample_minima_chain(seed, e, SUBDIVISION * g.length(e, metric)))
            .collect();
        Ok(EdgeChains {
            seed,
            metric,
            chains,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn chain(&self, e: EdgeId) -> &MinimaChain {
        &self.chains[e as usize]
    }
}

/// One edge hub: canonical endpoints `a < b` and their distances from the
/// label owner, in virtual (1/12) units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HubEntry {
    pub a: NodeId,
    pub b: NodeId,
    pub dist_a: u64,
    pub dist_b: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HubSet {
    pub owner: NodeId,
    /// Sorted by `(a, b)`, which is edge-id order.
    pub hubs: Vec<HubEntry>,
}

impl HubSet {
    pub fn len(&self) -> usize {
        self.hubs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hubs.is_empty()
    }
}

/// A piece of the root path: one tree edge traversed away from the root.
#[derive(Clone, Copy)]
struct Step {
    edge: EdgeId,
    /// Virtual position of the far end.
    end: u64,
    /// Traversal runs from the edge's smaller-id endpoint.
    forward: bool,
}

/// Minimum over local units `lo..=hi` of a step, counted from its root side.
fn step_min(chains: &EdgeChains, step: &Step, lo: u64, hi: u64) -> Option<RhoValue> {
    let chain = chains.chain(step.edge);
    let units = chain.units();
    if step.forward {
        chain.window_min(lo, hi)
    } else {
        chain.window_min(units - hi + 1, units - lo + 1)
    }
}

/// Hub edge for the target at the end of `path`, whose virtual length is
/// `12 * dist`. `full_min(i, j)` returns the minimum global value over whole
/// steps `i..j`.
fn select_hub<F>(chains: &EdgeChains, path: &[Step], dist: u64, full_min: F) -> EdgeId
where
    F: Fn(usize, usize) -> Option<RhoValue>,
{
    let lo = 5 * dist;
    let hi = 7 * dist;
    let first = path.partition_point(|s| s.end <= lo);
    let last = path.partition_point(|s| s.end < hi);
    if first == last {
        return path[first].edge;
    }
    let start = |i: usize| if i == 0 { 0 } else { path[i - 1].end };
    let head = step_min(chains, &path[first], lo + 1 - start(first), path[first].end - start(first))
        .expect("window piece touches the far end of its edge");
    let tail = step_min(chains, &path[last], 1, hi - start(last))
        .expect("window piece touches the near end of its edge");
    let mut best = head.min(tail);
    if let Some(mid) = full_min(first + 1, last) {
        best = best.min(mid);
    }
    best.owner
}

fn steps_to(g: &Graph, tree: &ShortestPathTree, v: NodeId) -> Vec<Step> {
    let nodes = tree.path_nodes(v);
    nodes
        .windows(2)
        .map(|w| {
            let (_, e) = tree.parent(w[1]).expect("non-root");
            Step {
                edge: e,
                end: SUBDIVISION * tree.dist(w[1]),
                forward: g.edge(e).a == w[0],
            }
        })
        .collect()
}

/// Hub edge of the pair `(tree.root(), v)`, evaluated on its own by walking
/// the path.
pub fn hub_edge(g: &Graph, tree: &ShortestPathTree, chains: &EdgeChains, v: NodeId) -> EdgeId {
    assert_ne!(v, tree.root(), "hub of a node with itself is undefined");
    let path = steps_to(g, tree, v);
    select_hub(chains, &path, tree.dist(v), |i, j| {
        path[i..j]
            .iter()
            .map(|s| chains.chain(s.edge).global_min())
            .min()
    })
}

/// Range-minimum tree over path depths.
pub(crate) struct MinTree {
    size: usize,
    data: Vec<Option<RhoValue>>,
}

impl MinTree {
    pub(crate) fn new(capacity: usize) -> Self {
        let size = capacity.next_power_of_two().max(1);
        MinTree {
            size,
            data: vec![None; 2 * size],
        }
    }

    pub(crate) fn set(&mut self, i: usize, v: RhoValue) {
        let mut i = i + self.size;
        self.data[i] = Some(v);
        while i > 1 {
            i /= 2;
            self.data[i] = match (self.data[2 * i], self.data[2 * i + 1]) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
        }
    }

    /// Minimum over `lo..hi`.
    pub(crate) fn min(&self, lo: usize, hi: usize) -> Option<RhoValue> {
        let (mut l, mut r) = (lo + self.size, hi + self.size);
        let mut best: Option<RhoValue> = None;
        let mut take = |x: Option<RhoValue>| {
            if let Some(x) = x {
                best = Some(best.map_or(x, |b| b.min(x)));
            }
        };
        while l < r {
            if l & 1 == 1 {
                take(self.data[l]);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                take(self.data[r]);
            }
            l /= 2;
            r /= 2;
        }
        best
    }
}

/// Computes the hub set of `tree.root()` over every target at tree distance
/// at least `min_target_dist`, by a depth-first scan that keeps the current
/// root path and a range-minimum structure over its edges. Each target's
/// window is then resolved in logarithmic time.
pub fn build_hub_set(
    g: &Graph,
    tree: &ShortestPathTree,
    chains: &EdgeChains,
    min_target_dist: u64,
) -> HubSet {
    let root = tree.root();
    let mut path: Vec<Step> = Vec::new();
    let mut mins = MinTree::new(tree.len());
    let mut hubs: Vec<EdgeId> = Vec::new();
    // (node, index of next child to visit)
    let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
    while let Some(top) = stack.last_mut() {
        let (v, next) = *top;
        let children = tree.children(v);
        if next == children.len() {
            stack.pop();
            path.pop();
            continue;
        }
        top.1 += 1;
        let c = children[next];
        let (_, e) = tree.parent(c).expect("child has a parent");
        let depth = path.len();
        path.push(Step {
            edge: e,
            end: SUBDIVISION * tree.dist(c),
            forward: g.edge(e).a == v,
        });
        mins.set(depth, chains.chain(e).global_min());
        let dist = tree.dist(c);
        if dist >= min_target_dist {
            hubs.push(select_hub(chains, &path, dist, |i, j| mins.min(i, j)));
        }
        stack.push((c, 0));
    }
    hubs.sort_unstable();
    hubs.dedup();
    let hubs = hubs
        .into_iter()
        .map(|e| {
            let edge = g.edge(e);
            HubEntry {
                a: edge.a,
                b: edge.b,
                dist_a: SUBDIVISION * tree.dist(edge.a),
                dist_b: SUBDIVISION * tree.dist(edge.b),
            }
        })
        .collect();
    HubSet { owner: root, hubs }
}

/// Smallest `d_u(w) + d_v(w)` over endpoints `w` of shared hub edges, in
/// virtual units. `None` when the sets share no edge.
pub fn decode_virtual(su: &[HubEntry], sv: &[HubEntry]) -> Option<u64> {
    let (mut i, mut j) = (0, 0);
    let mut best: Option<u64> = None;
    while i < su.len() && j < sv.len() {
        let (x, y) = (&su[i], &sv[j]);
        match (x.a, x.b).cmp(&(y.a, y.b)) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let cand = (x.dist_a + y.dist_a).min(x.dist_b + y.dist_b);
                best = Some(best.map_or(cand, |b| b.min(cand)));
                i += 1;
                j += 1;
            }
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labeling {
    seed: u64,
    fingerprint: String,
    sets: Vec<HubSet>,
}

pub const LABEL_HEADER: &str = "HUBLABELS";

impl Labeling {
    /// Builds the hub set of every node from one shared seed. Output does not
    /// depend on `parallel`.
    pub fn build(g: &Graph, seed: u64, parallel: bool) -> Result<Self> {
        let chains = EdgeChains::new(g, seed, Metric::Time)?;
        let one = |u: NodeId| -> Result<HubSet> {
            let tree = shortest_path_tree(g, u, Metric::Time)?;
            Ok(build_hub_set(g, &tree, &chains, 1))
        };
        let nodes = 0..g.n() as NodeId;
        let sets = if parallel {
            nodes.into_par_iter().map(one).collect::<Result<Vec<_>>>()?
        } else {
            nodes.map(one).collect::<Result<Vec<_>>>()?
        };
        Ok(Labeling {
            seed,
            fingerprint: g.fingerprint(),
            sets,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn n(&self) -> usize {
        self.sets.len()
    }

    pub fn hub_set(&self, u: NodeId) -> &HubSet {
        &self.sets[u as usize]
    }

    pub fn sets(&self) -> &[HubSet] {
        &self.sets
    }

    pub fn check_graph(&self, g: &Graph) -> Result<()> {
        let expected = g.fingerprint();
        if expected != self.fingerprint || g.n() != self.n() {
            return Err(Error::FingerprintMismatch {
                expected,
                found: self.fingerprint.clone(),
            });
        }
        Ok(())
    }

    /// Exact distance between `u` and `v` in original length units.
    pub fn query(&self, u: NodeId, v: NodeId) -> Result<u64> {
        for x in [u, v] {
            if x as usize >= self.n() {
                return Err(Error::NodeOutOfRange(x as u64));
            }
        }
        if u == v {
            return Ok(0);
        }
        let d = decode_virtual(&self.sets[u as usize].hubs, &self.sets[v as usize].hubs)
            .ok_or(Error::EmptyIntersection(u, v))?;
        debug_assert_eq!(d % SUBDIVISION, 0);
        Ok(d / SUBDIVISION)
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "{LABEL_HEADER} 1 n={} seed={} fp={}",
            self.n(),
            self.seed,
            self.fingerprint
        )?;
        let mut line = String::new();
        for set in &self.sets {
            line.clear();
            write!(line, "L {} {}", set.owner + 1, set.hubs.len()).unwrap();
            for h in &set.hubs {
                write!(line, " {} {} {} {}", h.a + 1, h.b + 1, h.dist_a, h.dist_b).unwrap();
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ASCII")
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "empty label file".into(),
        })?;
        let header_line = header?;
        let header = parse_header(&header_line, LABEL_HEADER, 1)?;
        let n: usize = header.get("n", 1)?;
        let seed: u64 = header.get("seed", 1)?;
        let fingerprint = header.raw("fp", 1)?.to_string();
        let mut sets = Vec::with_capacity(n);
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let nums = parse_record(&line, lineno)?;
            let owner = nums[0];
            let h = nums[1] as usize;
            if owner as usize != sets.len() + 1 || nums.len() != 2 + 4 * h {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "malformed label record".into(),
                });
            }
            let hubs: Vec<HubEntry> = nums[2..]
                .chunks(4)
                .map(|c| HubEntry {
                    a: c[0] as NodeId - 1,
                    b: c[1] as NodeId - 1,
                    dist_a: c[2],
                    dist_b: c[3],
                })
                .collect();
            if hubs.iter().any(|h| h.a >= h.b || h.b as usize >= n)
                || !hubs.windows(2).all(|w| (w[0].a, w[0].b) < (w[1].a, w[1].b))
            {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "hub edges must be canonical and sorted".into(),
                });
            }
            sets.push(HubSet {
                owner: owner as NodeId - 1,
                hubs,
            });
        }
        if sets.len() != n {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header announces {n} labels, found {}", sets.len()),
            });
        }
        Ok(Labeling {
            seed,
            fingerprint,
            sets,
        })
    }

    pub fn stats(&self) -> LabelStats {
        LabelStats::from_sizes(self.sets.iter().map(|s| s.len()))
    }
}

pub(crate) struct Header<'a> {
    fields: BTreeMap<&'a str, &'a str>,
}

impl<'a> Header<'a> {
    pub(crate) fn raw(&self, key: &str, line: usize) -> Result<&'a str> {
        self.fields.get(key).copied().ok_or_else(|| Error::Parse {
            line,
            msg: format!("header is missing `{key}`"),
        })
    }

    pub(crate) fn get<T: std::str::FromStr>(&self, key: &str, line: usize) -> Result<T> {
        let raw = self.raw(key, line)?;
        raw.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("invalid `{key}` value `{raw}`"),
        })
    }
}

pub(crate) fn parse_header<'a>(line: &'a str, magic: &str, lineno: usize) -> Result<Header<'a>> {
    let mut tok = line.split_whitespace();
    if tok.next() != Some(magic) || tok.next() != Some("1") {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("expected `{magic} 1` header"),
        });
    }
    let mut fields = BTreeMap::new();
    for t in tok {
        let (k, v) = t.split_once('=').ok_or_else(|| Error::Parse {
            line: lineno,
            msg: format!("malformed header field `{t}`"),
        })?;
        fields.insert(k, v);
    }
    Ok(Header { fields })
}

/// Parses `L <numbers...>` into the numbers.
pub(crate) fn parse_record(line: &str, lineno: usize) -> Result<Vec<u64>> {
    let mut tok = line.split_whitespace();
    if tok.next() != Some("L") {
        return Err(Error::Parse {
            line: lineno,
            msg: "expected a label record `L ...`".into(),
        });
    }
    let nums = tok
        .map(|t| t.parse::<u64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Parse {
            line: lineno,
            msg: "non-numeric field in label record".into(),
        })?;
    if nums.len() < 2 || nums[0] == 0 {
        return Err(Error::Parse {
            line: lineno,
            msg: "label record too short".into(),
        });
    }
    Ok(nums)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabelStats {
    pub nodes: usize,
    pub mean: f64,
    pub max: usize,
    pub total: usize,
    pub histogram: BTreeMap<usize, usize>,
}

impl LabelStats {
    pub fn from_sizes(sizes: impl Iterator<Item = usize>) -> Self {
        let mut histogram = BTreeMap::new();
        let (mut nodes, mut total, mut max) = (0, 0, 0);
        for s in sizes {
            *histogram.entry(s).or_insert(0) += 1;
            nodes += 1;
            total += s;
            max = max.max(s);
        }
        LabelStats {
            nodes,
            mean: if nodes == 0 { 0.0 } else { total as f64 / nodes as f64 },
            max,
            total,
            histogram,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum PairSelection {
    Exhaustive,
    Sample { count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub u: NodeId,
    pub v: NodeId,
    pub expected: u64,
    pub decoded: Option<u64>,
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub pairs: usize,
    pub mismatches: Vec<Mismatch>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

pub(crate) fn sample_pairs(n: usize, count: usize, seed: u64) -> Vec<(NodeId, NodeId)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut pairs: Vec<(NodeId, NodeId)> = (0..count)
        .map(|_| (rng.gen_range(0..n) as NodeId, rng.gen_range(0..n) as NodeId))
        .collect();
    pairs.sort_unstable();
    pairs
}

/// Compares decoded distances with plain Dijkstra distances.
pub fn verify_labeling(g: &Graph, labels: &Labeling, pairs: PairSelection) -> Result<VerifyReport> {
    labels.check_graph(g)?;
    let n = g.n();
    let check = |u: NodeId, dists: &[u64], v: NodeId| -> Option<Mismatch> {
        let decoded = labels.query(u, v).ok();
        (decoded != Some(dists[v as usize])).then_some(Mismatch {
            u,
            v,
            expected: dists[v as usize],
            decoded,
        })
    };
    let (pairs_checked, mismatches) = match pairs {
        PairSelection::Exhaustive => {
            let per_source: Vec<Vec<Mismatch>> = (0..n as NodeId)
                .into_par_iter()
                .map(|u| {
                    let dists = distances_from(g, u, Metric::Time);
                    (0..n as NodeId).filter_map(|v| check(u, &dists, v)).collect()
                })
                .collect();
            (n * n, per_source.into_iter().flatten().collect())
        }
        PairSelection::Sample { count, seed } => {
            let pairs = sample_pairs(n, count, seed);
            let mut by_source: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
            for (u, v) in pairs {
                by_source.entry(u).or_default().push(v);
            }
            let found: Vec<Vec<Mismatch>> = by_source
                .into_par_iter()
                .map(|(u, targets)| {
                    let dists = distances_from(g, u, Metric::Time);
                    targets.into_iter().filter_map(|v| check(u, &dists, v)).collect()
                })
                .collect();
            (count, found.into_iter().flatten().collect())
        }
    };
    Ok(VerifyReport {
        pairs: pairs_checked,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn star(m: u32) -> Graph {
        Graph::from_edges(m as usize + 1, (1..=m).map(|i| (0, i, 1))).unwrap()
    }

    #[test]
    fn single_edge_is_its_own_hub() {
        let g = Graph::from_edges(2, [(0, 1, 1)]).unwrap();
        let chains = EdgeChains::new(&g, 4, Metric::Time).unwrap();
        let t = shortest_path_tree(&g, 0, Metric::Time).unwrap();
        assert_eq!(hub_edge(&g, &t, &chains, 1), 0);
        let l = Labeling::build(&g, 4, false).unwrap();
        for u in 0..2 {
            assert_eq!(l.hub_set(u).hubs.len(), 1);
        }
        assert_eq!(l.hub_set(0).hubs[0], HubEntry { a: 0, b: 1, dist_a: 0, dist_b: 12 });
        assert_eq!(l.query(0, 1).unwrap(), 1);
    }

    #[test]
    fn star_center_hubs_are_incident_edges() {
        let g = star(3);
        let l = Labeling::build(&g, 9, false).unwrap();
        let center: Vec<_> = l.hub_set(0).hubs.iter().map(|h| (h.a, h.b)).collect();
        assert_eq!(center, vec![(0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn path_query() {
        let g = Graph::from_edges(3, [(0, 1, 1), (1, 2, 1)]).unwrap();
        let l = Labeling::build(&g, 0, false).unwrap();
        assert_eq!(l.query(0, 2).unwrap(), 2);
        assert_eq!(l.query(1, 1).unwrap(), 0);
        assert!(l.query(0, 5).is_err());
    }

    #[test]
    fn min_tree_matches_linear_scan() {
        let vals: Vec<RhoValue> = (0..37)
            .map(|i| RhoValue {
                value: ((i * 7919) % 101) as f64 / 101.0,
                owner: i,
                index: 1,
            })
            .collect();
        let mut t = MinTree::new(vals.len());
        for (i, v) in vals.iter().enumerate() {
            t.set(i, *v);
        }
        for lo in 0..vals.len() {
            for hi in lo..=vals.len() {
                assert_eq!(t.min(lo, hi), vals[lo..hi].iter().copied().min());
            }
        }
    }

    #[test]
    fn label_file_round_trip() {
        let g = Graph::from_edges(4, [(0, 1, 3), (1, 2, 1), (2, 3, 2), (0, 3, 5)]).unwrap();
        let l = Labeling::build(&g, 17, true).unwrap();
        let text = l.to_text();
        assert!(text.starts_with(&format!("HUBLABELS 1 n=4 seed=17 fp={}\n", g.fingerprint())));
        let back = Labeling::read(text.as_bytes()).unwrap();
        assert_eq!(back, l);
    }

    #[test]
    fn corrupt_label_files_rejected() {
        assert!(Labeling::read("NOPE 1 n=1\n".as_bytes()).is_err());
        assert!(Labeling::read("HUBLABELS 1 n=2 seed=0 fp=00\nL 1 0\n".as_bytes()).is_err());
        assert!(Labeling::read("HUBLABELS 1 n=1 seed=0 fp=00\nL 1 1 1 2 0\n".as_bytes()).is_err());
    }

    #[test]
    fn fingerprint_checked_on_verify() {
        let g = Graph::from_edges(2, [(0, 1, 1)]).unwrap();
        let h = Graph::from_edges(2, [(0, 1, 2)]).unwrap();
        let l = Labeling::build(&g, 0, false).unwrap();
        assert!(matches!(
            verify_labeling(&h, &l, PairSelection::Exhaustive),
            Err(Error::FingerprintMismatch { .. })
        ));
        let report = verify_labeling(&g, &l, PairSelection::Exhaustive).unwrap();
        assert_eq!(report.pairs, 4);
        assert!(report.is_clean());
    }
}
