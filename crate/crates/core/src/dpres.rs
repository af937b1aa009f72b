//! D-preserving distance labels on unweighted graphs.
//!
//! Two hub constructions are combined. For a scale `D` the range scheme
//! answers pairs at hop distance in `[D, 5D/4]`: it keeps the heavy part of
//! the truncated tree `T*_u` (nodes whose subtree reaches at least `D`
//! leaves at the last level) and, in the light forest below it, the
//! `rho`-minimum of every descending window of `D/12` nodes. Scales are
//! chained so that their ranges tile `[D, D_max)`. Pairs at distance at
//! least `D_max` are served by the edge-hub construction of [`crate::hub`]
//! restricted to far targets, with every hub edge stored as its two
//! endpoints.
//!
//! All distances here are hop counts; edge lengths of the input are ignored.

use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Graph, Metric, NodeId};
use crate::hub::{
    build_hub_set, parse_header, parse_record, sample_pairs, EdgeChains, LabelStats, MinTree,
    Mismatch, PairSelection, VerifyReport,
};
use crate::rho::{node_rho, RhoValue};
use crate::skeleton::SUBDIVISION;
use crate::spt::{distances_from, shortest_path_tree, ShortestPathTree};

/// Level parameters of one range scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RangeParams {
    pub d: u64,
    /// Largest covered distance, `floor(5D/4)`.
    pub upper: u64,
    /// Truncation level of `T*_u`, `ceil(3D/4)`.
    pub depth: u64,
    /// Window size in nodes, `floor(D/12)`.
    pub window: u64,
}

impl RangeParams {
    /// Parameters for any `D >= 12`. They coincide with the exact fractions
    /// when `12 | D`; otherwise the rounding keeps the shared part of a
    /// covered path at least three windows long.
    pub fn new(d: u64) -> Result<Self> {
        if d < SUBDIVISION {
            return Err(Error::Parameter(format!("D must be at least 12, got {d}")));
        }
        Ok(RangeParams {
            d,
            upper: 5 * d / 4,
            depth: (3 * d).div_ceil(4),
            window: d / 12,
        })
    }

    /// Bound on the heavy part: each of its leaves owns `D` disjoint
    /// descending paths of `D - depth` nodes below the truncation level.
    pub fn heavy_bound(&self, n: usize) -> u64 {
        1 + self.depth * (n as u64 / (self.d * (self.d - self.depth)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RangeHubSet {
    pub owner: NodeId,
    pub params: RangeParams,
    /// `(node, hops)` sorted by node.
    pub heavy: Vec<(NodeId, u64)>,
    /// Window minima of the light forest, sorted by node.
    pub light: Vec<(NodeId, u64)>,
    /// Node counts of the light components.
    pub light_components: Vec<usize>,
}

impl RangeHubSet {
    pub fn hubs(&self) -> Vec<(NodeId, u64)> {
        let mut all: Vec<_> = self.heavy.iter().chain(&self.light).copied().collect();
        all.sort_unstable();
        all.dedup();
        all
    }
}

fn node_values(n: usize, seed: u64) -> Vec<RhoValue> {
    (0..n as NodeId)
        .into_par_iter()
        .map(|v| RhoValue {
            value: node_rho(seed, v),
            owner: v,
            index: 0,
        })
        .collect()
}

/// Range hub set on a hop-metric shortest-path tree.
fn range_hub_set(tree: &ShortestPathTree, p: RangeParams, rho: &[RhoValue]) -> RangeHubSet {
    let n = tree.len();
    let order = tree.order();
    // in T_u: some descendant is a target
    let mut in_tree = vec![false; n];
    for &v in order.iter().rev() {
        let d = tree.dist(v);
        if (p.d..=p.upper).contains(&d) {
            in_tree[v as usize] = true;
        }
        if in_tree[v as usize] {
            if let Some((parent, _)) = tree.parent(v) {
                in_tree[parent as usize] = true;
            }
        }
    }
    let in_star = |v: NodeId| in_tree[v as usize] && tree.dist(v) <= p.depth;

    let mut leaves = vec![0u64; n];
    let mut size = vec![0usize; n];
    for &v in order.iter().rev() {
        if !in_star(v) {
            continue;
        }
        if tree.dist(v) == p.depth {
            leaves[v as usize] += 1;
        }
        size[v as usize] += 1;
        if let Some((parent, _)) = tree.parent(v) {
            leaves[parent as usize] += leaves[v as usize];
            size[parent as usize] += size[v as usize];
        }
    }
    let heavy_node = |v: NodeId| in_star(v) && leaves[v as usize] >= p.d;

    let mut heavy = Vec::new();
    let mut light = Vec::new();
    let mut light_components = Vec::new();
    let root = tree.root();
    if in_star(root) {
        let w = p.window as usize;
        let mut mins = MinTree::new(p.depth as usize + 1);
        let mut first_light: Option<usize> = None;
        let mut stack: Vec<(NodeId, usize)> = vec![(root, 0)];
        let mut enter = |v: NodeId, depth: usize, first_light: &mut Option<usize>| {
            mins.set(depth, rho[v as usize]);
            if heavy_node(v) {
                heavy.push((v, tree.dist(v)));
                return;
            }
            let start = *first_light.get_or_insert_with(|| {
                light_components.push(size[v as usize]);
                depth
            });
            if depth + 1 >= start + w {
                let m = mins.min(depth + 1 - w, depth + 1).expect("window is filled");
                light.push((m.owner, tree.dist(m.owner)));
            }
        };
        enter(root, 0, &mut first_light);
        while let Some(top) = stack.last_mut() {
            let (v, next) = *top;
            let children = tree.children(v);
            if let Some(pos) = children[next..].iter().position(|&c| in_star(c)) {
                let c = children[next + pos];
                top.1 = next + pos + 1;
                let depth = stack.len();
                enter(c, depth, &mut first_light);
                stack.push((c, 0));
            } else {
                stack.pop();
                if first_light == Some(stack.len()) {
                    first_light = None;
                }
            }
        }
    }
    heavy.sort_unstable();
    light.sort_unstable();
    light.dedup();

    assert!(
        heavy.len() as u64 <= p.heavy_bound(n),
        "heavy part of size {} exceeds its bound",
        heavy.len()
    );
    assert!(
        light_components.iter().all(|&s| (s as u64) < p.d * p.d),
        "light component with at least D^2 nodes"
    );
    RangeHubSet {
        owner: root,
        params: p,
        heavy,
        light,
        light_components,
    }
}

/// Hub set of `u` for hop distances in `[D, 5D/4]`.
pub fn build_range_hub_set(g: &Graph, u: NodeId, d: u64, seed: u64) -> Result<RangeHubSet> {
    if !d.is_multiple_of(SUBDIVISION) {
        return Err(Error::Parameter(format!("D must be divisible by 12, got {d}")));
    }
    let p = RangeParams::new(d)?;
    let tree = shortest_path_tree(g, u, Metric::Hop)?;
    Ok(range_hub_set(&tree, p, &node_values(g.n(), seed)))
}

/// Default threshold above which the edge-hub scheme takes over.
pub fn default_d_max(d: u64, n: usize) -> u64 {
    let n = n as f64;
    let t = if n > 1.0 { (n.sqrt() / n.ln()).floor() as u64 } else { 0 };
    d.max(t)
}

/// Range scales whose intervals `[D_i, floor(5 D_i / 4)]` tile
/// `[12 floor(D/12), d_max)`. The next scale is the largest multiple of 12
/// not exceeding `floor(5 D_i / 4) + 1` when that still moves forward, and
/// `floor(5 D_i / 4) + 1` itself otherwise.
pub fn d_scales(d: u64, d_max: u64) -> Result<Vec<u64>> {
    let mut cur = SUBDIVISION * (d / SUBDIVISION);
    RangeParams::new(cur)?;
    let mut out = Vec::new();
    while cur < d_max {
        out.push(cur);
        let reach = 5 * cur / 4 + 1;
        let aligned = SUBDIVISION * (reach / SUBDIVISION);
        cur = if aligned > cur { aligned } else { reach };
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DLabel {
    pub owner: NodeId,
    /// `(node, hops)` sorted by node.
    pub hubs: Vec<(NodeId, u64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DQuery {
    Distance(u64),
    /// No guarantee applies: the pair is closer than `D`.
    BelowRange,
}

/// Combined label of one node: every range scale below `d_max` plus the
/// far-target edge hubs.
pub fn build_d_preserving_label(
    g: &Graph,
    u: NodeId,
    scales: &[u64],
    d_max: u64,
    rho: &[RhoValue],
    chains: &EdgeChains,
) -> Result<DLabel> {
    let tree = shortest_path_tree(g, u, Metric::Hop)?;
    let mut hubs = Vec::new();
    for &s in scales {
        hubs.extend(range_hub_set(&tree, RangeParams::new(s)?, rho).hubs());
    }
    for h in build_hub_set(g, &tree, chains, d_max).hubs {
        hubs.push((h.a, h.dist_a / SUBDIVISION));
        hubs.push((h.b, h.dist_b / SUBDIVISION));
    }
    hubs.sort_unstable();
    hubs.dedup();
    Ok(DLabel { owner: u, hubs })
}

pub const DPRES_HEADER: &str = "DPRESLABELS";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DPresLabeling {
    d: u64,
    d_max: u64,
    seed: u64,
    fingerprint: String,
    labels: Vec<DLabel>,
}

impl DPresLabeling {
    /// Builds every node's label. `d_max` defaults to
    /// `max(D, floor(sqrt(n) / ln n))`.
    pub fn build(g: &Graph, d: u64, seed: u64, d_max: Option<u64>, parallel: bool) -> Result<Self> {
        let d_max = d_max.unwrap_or_else(|| default_d_max(d, g.n()));
        if d_max < d {
            return Err(Error::Parameter(format!("dmax {d_max} is below D {d}")));
        }
        let scales = d_scales(d, d_max)?;
        let rho = node_values(g.n(), seed);
        let chains = EdgeChains::new(g, seed, Metric::Hop)?;
        let one = |u: NodeId| build_d_preserving_label(g, u, &scales, d_max, &rho, &chains);
        let nodes = 0..g.n() as NodeId;
        let labels = if parallel {
            nodes.into_par_iter().map(one).collect::<Result<Vec<_>>>()?
        } else {
            nodes.map(one).collect::<Result<Vec<_>>>()?
        };
        Ok(DPresLabeling {
            d,
            d_max,
            seed,
            fingerprint: g.fingerprint(),
            labels,
        })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn d_max(&self) -> u64 {
        self.d_max
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, u: NodeId) -> &DLabel {
        &self.labels[u as usize]
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

    pub fn query(&self, u: NodeId, v: NodeId) -> Result<DQuery> {
        for x in [u, v] {
            if x as usize >= self.n() {
                return Err(Error::NodeOutOfRange(x as u64));
            }
        }
        Ok(query_d_preserving(&self.labels[u as usize], &self.labels[v as usize], self.d))
    }

    pub fn stats(&self) -> LabelStats {
        LabelStats::from_sizes(self.labels.iter().map(|l| l.hubs.len()))
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "{DPRES_HEADER} 1 D={} n={} seed={} fp={} dmax={}",
            self.d,
            self.n(),
            self.seed,
            self.fingerprint,
            self.d_max
        )?;
        for l in &self.labels {
            write!(out, "L {} {}", l.owner + 1, l.hubs.len())?;
            for &(w, d) in &l.hubs {
                write!(out, " {} {}", w + 1, d)?;
            }
            writeln!(out)?;
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
        let header = parse_header(&header_line, DPRES_HEADER, 1)?;
        let d: u64 = header.get("D", 1)?;
        let n: usize = header.get("n", 1)?;
        let seed: u64 = header.get("seed", 1)?;
        let d_max: u64 = header.get("dmax", 1)?;
        let fingerprint = header.raw("fp", 1)?.to_string();
        let mut labels = Vec::with_capacity(n);
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let nums = parse_record(&line, lineno)?;
            let h = nums[1] as usize;
            if nums[0] as usize != labels.len() + 1 || nums.len() != 2 + 2 * h {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "malformed label record".into(),
                });
            }
            let hubs: Vec<(NodeId, u64)> = nums[2..]
                .chunks(2)
                .map(|c| (c[0] as NodeId - 1, c[1]))
                .collect();
            if hubs.iter().any(|&(w, _)| w as usize >= n)
                || !hubs.windows(2).all(|p| p[0].0 < p[1].0)
            {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "hub nodes must be in range and strictly increasing".into(),
                });
            }
            labels.push(DLabel {
                owner: nums[0] as NodeId - 1,
                hubs,
            });
        }
        if labels.len() != n {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header announces {n} labels, found {}", labels.len()),
            });
        }
        Ok(DPresLabeling {
            d,
            d_max,
            seed,
            fingerprint,
            labels,
        })
    }
}

/// Minimum of `d(u, w) + d(w, v)` over shared hubs. Results below `d` and
/// empty intersections carry no guarantee and are reported as below range.
pub fn query_d_preserving(lu: &DLabel, lv: &DLabel, d: u64) -> DQuery {
    if lu.owner == lv.owner {
        return DQuery::Distance(0);
    }
    let (a, b) = (&lu.hubs, &lv.hubs);
    let (mut i, mut j) = (0, 0);
    let mut best: Option<u64> = None;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let c = a[i].1 + b[j].1;
                best = Some(best.map_or(c, |x| x.min(c)));
                i += 1;
                j += 1;
            }
        }
    }
    match best {
        Some(x) if x >= d => DQuery::Distance(x),
        _ => DQuery::BelowRange,
    }
}

/// Checks every selected pair at hop distance at least `min_dist` against
/// BFS distances.
pub fn verify_d_preserving(
    g: &Graph,
    labels: &DPresLabeling,
    min_dist: u64,
    pairs: PairSelection,
) -> Result<VerifyReport> {
    labels.check_graph(g)?;
    let n = g.n();
    let sources: Vec<(NodeId, Option<Vec<NodeId>>)> = match pairs {
        PairSelection::Exhaustive => (0..n as NodeId).map(|u| (u, None)).collect(),
        PairSelection::Sample { count, seed } => {
            let mut grouped: std::collections::BTreeMap<NodeId, Vec<NodeId>> = Default::default();
            for (u, v) in sample_pairs(n, count, seed) {
                grouped.entry(u).or_default().push(v);
            }
            grouped.into_iter().map(|(u, vs)| (u, Some(vs))).collect()
        }
    };
    let results: Vec<(usize, Vec<Mismatch>)> = sources
        .into_par_iter()
        .map(|(u, targets)| {
            let dist = distances_from(g, u, Metric::Hop);
            let targets = targets.unwrap_or_else(|| (0..n as NodeId).collect());
            let mut checked = 0;
            let mut bad = Vec::new();
            for v in targets {
                let expected = dist[v as usize];
                if expected < min_dist {
                    continue;
                }
                checked += 1;
                let got = labels.query(u, v).expect("nodes in range");
                if got != DQuery::Distance(expected) {
                    bad.push(Mismatch {
                        u,
                        v,
                        expected,
                        decoded: match got {
                            DQuery::Distance(x) => Some(x),
                            DQuery::BelowRange => None,
                        },
                    });
                }
            }
            (checked, bad)
        })
        .collect();
    let mut report = VerifyReport::default();
    for (c, bad) in results {
        report.pairs += c;
        report.mismatches.extend(bad);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: u32) -> Graph {
        Graph::from_edges(n as usize, (0..n - 1).map(|i| (i, i + 1, 1))).unwrap()
    }

    #[test]
    fn params_match_fractions_when_divisible() {
        let p = RangeParams::new(24).unwrap();
        assert_eq!((p.upper, p.depth, p.window), (30, 18, 2));
        assert!(RangeParams::new(11).is_err());
    }

    #[test]
    fn scale_sequence_tiles_the_range() {
        for d in 12..200 {
            for d_max in [d, d + 1, 3 * d, 1000] {
                let s = d_scales(d, d_max).unwrap();
                assert!(s.windows(2).all(|w| w[0] < w[1] && w[1] <= 5 * w[0] / 4 + 1));
                if d % 12 != 0 || d_max > d {
                    assert_eq!(s[0], 12 * (d / 12));
                    let last = *s.last().unwrap();
                    assert!(5 * last / 4 + 1 >= d_max);
                } else {
                    assert!(s.is_empty());
                }
            }
        }
        assert_eq!(d_scales(12, 100).unwrap(), vec![12, 16, 21, 24, 31, 36, 46, 48, 60, 72, 84, 96]);
    }

    #[test]
    fn range_set_requires_divisible_d() {
        let g = path(30);
        assert!(build_range_hub_set(&g, 0, 13, 0).is_err());
        // eccentricity below D: nothing to cover
        assert!(build_range_hub_set(&path(5), 0, 12, 0).unwrap().hubs().is_empty());
    }

    #[test]
    fn path_range_set_is_window_minima() {
        let g = path(30);
        let seed = 5;
        let s = build_range_hub_set(&g, 0, 12, seed).unwrap();
        assert!(s.heavy.is_empty());
        // T* is the subpath 0..=9, window of one node keeps every node
        let nodes: Vec<_> = s.light.iter().map(|x| x.0).collect();
        assert_eq!(nodes, (0..=9).collect::<Vec<_>>());
        let s = build_range_hub_set(&g, 0, 24, seed).unwrap();
        let rho: Vec<f64> = (0..30).map(|v| node_rho(seed, v)).collect();
        let mut expect: Vec<u32> = (0..=18)
            .collect::<Vec<u32>>()
            .windows(2)
            .map(|w| *w.iter().min_by(|a, b| rho[**a as usize].total_cmp(&rho[**b as usize])).unwrap())
            .collect();
        expect.sort_unstable();
        expect.dedup();
        assert_eq!(s.light.iter().map(|x| x.0).collect::<Vec<_>>(), expect);
    }

    #[test]
    fn star_of_paths_has_heavy_root() {
        // 13 arms of length 12 around a center: 13 leaves at level 9
        let arms = 13u32;
        let mut edges = Vec::new();
        for a in 0..arms {
            let base = 1 + a * 12;
            edges.push((0, base, 1));
            for i in 0..11 {
                edges.push((base + i, base + i + 1, 1));
            }
        }
        let g = Graph::from_edges(1 + 12 * arms as usize, edges).unwrap();
        let s = build_range_hub_set(&g, 0, 12, 1).unwrap();
        assert_eq!(s.heavy, vec![(0, 0)]);
        assert_eq!(s.light_components, vec![9; arms as usize]);
    }

    #[test]
    fn path_query_and_file_round_trip() {
        let g = path(50);
        let l = DPresLabeling::build(&g, 12, 3, None, false).unwrap();
        assert_eq!(l.query(0, 48).unwrap(), DQuery::Distance(48));
        assert_eq!(l.query(7, 7).unwrap(), DQuery::Distance(0));
        let back = DPresLabeling::read(l.to_text().as_bytes()).unwrap();
        assert_eq!(back, l);
        let r = verify_d_preserving(&g, &l, 12, PairSelection::Exhaustive).unwrap();
        assert!(r.is_clean());
    }

    #[test]
    fn range_only_and_tail_only_both_decode() {
        let g = Graph::from_edges(120, (0..120).map(|i| (i, (i + 1) % 120, 1))).unwrap();
        for d_max in [24, 61] {
            let l = DPresLabeling::build(&g, 24, 9, Some(d_max), true).unwrap();
            let r = verify_d_preserving(&g, &l, 24, PairSelection::Exhaustive).unwrap();
            assert!(r.is_clean(), "dmax {d_max}: {:?}", &r.mismatches[..1]);
        }
    }
}
