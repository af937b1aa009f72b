//! Undirected graphs with positive integer lengths.
//!
//! Edges are stored once, in canonical order: sorted by `(min endpoint, max
//! endpoint)`. The position of an edge in that order is its [`EdgeId`], so
//! edge ids depend only on the edge set and not on input order.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type NodeId = u32;
pub type EdgeId = u32;

/// Named length functions. `Time` is the primary length read from the graph
/// file and is the one shortest-path trees are normally built with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Time,
    Dist,
    Hop,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Time => "time",
            Metric::Dist => "dist",
            Metric::Hop => "hop",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" => Ok(Metric::Time),
            "dist" => Ok(Metric::Dist),
            "hop" => Ok(Metric::Hop),
            other => Err(Error::Parameter(format!("unknown metric `{other}`"))),
        }
    }
}

/// An undirected edge with `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
}

impl Edge {
    pub fn new(u: NodeId, v: NodeId) -> Self {
        Edge { a: u.min(v), b: u.max(v) }
    }

    pub fn other(&self, v: NodeId) -> NodeId {
        if v == self.a {
            self.b
        } else {
            self.a
        }
    }
}

const TIEBREAK_SEED: u64 = 0x5eed_71eb_4eac_0de1;

/// splitmix64 finalizer.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    time: Vec<u64>,
    dist: Option<Vec<u64>>,
    offsets: Vec<usize>,
    adj: Vec<(NodeId, EdgeId)>,
    tiebreak: Vec<u64>,
}

impl Graph {
    /// Builds a graph from undirected weighted edges. Self-loops are dropped,
    /// parallel edges keep the minimum length, zero lengths and disconnected
    /// inputs are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, u64)>,
    {
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no nodes".into()));
        }
        if n > NodeId::MAX as usize {
            return Err(Error::InvalidGraph(format!("{n} nodes exceed the id range")));
        }
        let mut lengths: BTreeMap<Edge, u64> = BTreeMap::new();
        for (u, v, w) in edges {
            if u as usize >= n {
                return Err(Error::NodeOutOfRange(u as u64));
            }
            if v as usize >= n {
                return Err(Error::NodeOutOfRange(v as u64));
            }
            if w == 0 {
                return Err(Error::InvalidGraph(format!(
                    "edge {{{u}, {v}}} has zero length"
                )));
            }
            if u == v {
                continue;
            }
            lengths
                .entry(Edge::new(u, v))
                .and_modify(|cur| *cur = (*cur).min(w))
                .or_insert(w);
        }
        let (edges, time): (Vec<Edge>, Vec<u64>) = lengths.into_iter().unzip();
        let g = Self::assemble(n, edges, time);
        let components = g.count_components();
        if components != 1 {
            return Err(Error::Disconnected { components });
        }
        Ok(g)
    }

    fn assemble(n: usize, edges: Vec<Edge>, time: Vec<u64>) -> Self {
        let mut degree = vec![0usize; n + 1];
        for e in &edges {
            degree[e.a as usize] += 1;
            degree[e.b as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for d in degree.iter().take(n) {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        let mut fill = offsets.clone();
        let mut adj = vec![(0, 0); acc];
        for (id, e) in edges.iter().enumerate() {
            adj[fill[e.a as usize]] = (e.b, id as EdgeId);
            fill[e.a as usize] += 1;
            adj[fill[e.b as usize]] = (e.a, id as EdgeId);
            fill[e.b as usize] += 1;
        }
        let tiebreak = (0..edges.len() as u64)
            .map(|id| mix64(id ^ TIEBREAK_SEED))
            .collect();
        Graph {
            n,
            edges,
            time,
            dist: None,
            offsets,
            adj,
            tiebreak,
        }
    }

    fn count_components(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut stack = Vec::new();
        let mut components = 0;
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            components += 1;
            seen[s] = true;
            stack.push(s as NodeId);
            while let Some(v) = stack.pop() {
                for &(w, _) in self.neighbors(v) {
                    if !seen[w as usize] {
                        seen[w as usize] = true;
                        stack.push(w);
                    }
                }
            }
        }
        components
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e as usize]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, EdgeId)] {
        let v = v as usize;
        &self.adj[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.neighbors(v).len()
    }

    /// Looks up the edge joining `u` and `v`.
    pub fn find_edge(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        let key = Edge::new(u, v);
        self.edges.binary_search(&key).ok().map(|i| i as EdgeId)
    }

    pub fn has_metric(&self, metric: Metric) -> bool {
        metric != Metric::Dist || self.dist.is_some()
    }

    /// Length of `e` under `metric`. Panics if the metric is not attached;
    /// check with [`Graph::require_metric`] first.
    #[inline]
    pub fn length(&self, e: EdgeId, metric: Metric) -> u64 {
        match metric {
            Metric::Time => self.time[e as usize],
            Metric::Dist => self.dist.as_ref().expect("dist metric not attached")[e as usize],
            Metric::Hop => 1,
        }
    }

    pub fn require_metric(&self, metric: Metric) -> Result<()> {
        if self.has_metric(metric) {
            Ok(())
        } else {
            Err(Error::MissingMetric(metric.name()))
        }
    }

    /// Per-edge 64-bit perturbation key used to break ties between
    /// equal-length paths.
    #[inline]
    pub fn tiebreak_key(&self, e: EdgeId) -> u64 {
        self.tiebreak[e as usize]
    }

    pub fn total_length(&self, metric: Metric) -> u64 {
        (0..self.m() as EdgeId).map(|e| self.length(e, metric)).sum()
    }

    pub fn check_node(&self, v: u64) -> Result<NodeId> {
        if (v as usize) < self.n {
            Ok(v as NodeId)
        } else {
            Err(Error::NodeOutOfRange(v))
        }
    }

    /// Attaches a secondary `dist` length function taken from `other`, which
    /// must have exactly the same edge set.
    pub fn attach_dist(&mut self, other: &Graph) -> Result<()> {
        if other.n != self.n || other.edges != self.edges {
            return Err(Error::InvalidGraph(
                "distance graph does not have the same edge set".into(),
            ));
        }
        self.dist = Some(other.time.clone());
        Ok(())
    }

    /// Canonical DIMACS serialization of the primary length function: one
    /// arc pair per edge, edges in id order.
    pub fn write_dimacs<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "p sp {} {}", self.n, 2 * self.m())?;
        for (e, w) in self.edges.iter().zip(&self.time) {
            writeln!(out, "a {} {} {}", e.a + 1, e.b + 1, w)?;
            writeln!(out, "a {} {} {}", e.b + 1, e.a + 1, w)?;
        }
        Ok(())
    }

    pub fn to_dimacs_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_dimacs(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("DIMACS output is ASCII")
    }

    /// First 64 bits of the SHA-256 of the canonical DIMACS text, in hex.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.to_dimacs_string().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn read_dimacs_file<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_dimacs(std::io::BufReader::new(file))
    }

    pub fn parse_dimacs(text: &str) -> Result<Self> {
        Self::read_dimacs(text.as_bytes())
    }

    /// Reads the DIMACS shortest-path format (`c`, `p sp n m`, `a u v w`
    /// lines, 1-based ids). Arcs are symmetrized; repeated arcs keep their
    /// minimum weight; an arc pair `(u,v,w)`, `(v,u,w')` with `w != w'` is
    /// rejected.
    pub fn read_dimacs<R: BufRead>(reader: R) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut arcs: BTreeMap<(NodeId, NodeId), u64> = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = idx + 1;
            let err = |msg: &str| Error::Parse {
                line: lineno,
                msg: msg.to_string(),
            };
            let mut tok = line.split_whitespace();
            match tok.next() {
                None | Some("c") => continue,
                Some("p") => {
                    if n.is_some() {
                        return Err(err("duplicate problem line"));
                    }
                    if tok.next() != Some("sp") {
                        return Err(err("expected `p sp <n> <m>`"));
                    }
                    let nodes: usize = parse_field(tok.next(), lineno, "node count")?;
                    let _arcs: usize = parse_field(tok.next(), lineno, "arc count")?;
                    if tok.next().is_some() {
                        return Err(err("trailing fields on problem line"));
                    }
                    n = Some(nodes);
                }
                Some("a") => {
                    let nodes = n.ok_or_else(|| err("arc before problem line"))?;
                    let u: u64 = parse_field(tok.next(), lineno, "tail")?;
                    let v: u64 = parse_field(tok.next(), lineno, "head")?;
                    let w: i64 = parse_field(tok.next(), lineno, "weight")?;
                    if tok.next().is_some() {
                        return Err(err("trailing fields on arc line"));
                    }
                    if u == 0 || v == 0 || u as usize > nodes || v as usize > nodes {
                        return Err(err("node id out of range"));
                    }
                    if w <= 0 {
                        return Err(err("arc weight must be positive"));
                    }
                    let key = ((u - 1) as NodeId, (v - 1) as NodeId);
                    arcs.entry(key)
                        .and_modify(|cur| *cur = (*cur).min(w as u64))
                        .or_insert(w as u64);
                }
                Some(other) => {
                    return Err(err(&format!("unknown line type `{other}`")));
                }
            }
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            msg: "missing problem line".into(),
        })?;
        let mut edges = Vec::with_capacity(arcs.len() / 2 + 1);
        for (&(u, v), &w) in &arcs {
            match arcs.get(&(v, u)) {
                Some(&back) if back != w => {
                    return Err(Error::InvalidGraph(format!(
                        "arcs {}->{} ({w}) and {}->{} ({back}) disagree",
                        u + 1,
                        v + 1,
                        v + 1,
                        u + 1
                    )));
                }
                Some(_) if v < u => continue,
                _ => edges.push((u, v, w)),
            }
        }
        Self::from_edges(n, edges)
    }
}

fn parse_field<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid {what} `{tok}`"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arc_pair_becomes_one_edge() {
        let g = Graph::parse_dimacs("p sp 2 2\na 1 2 5\na 2 1 5\n").unwrap();
        assert_eq!(g.m(), 1);
        assert_eq!(g.length(0, Metric::Time), 5);
    }

    #[test]
    fn duplicate_arcs_keep_minimum() {
        let g = Graph::parse_dimacs("p sp 2 2\na 1 2 5\na 1 2 7\n").unwrap();
        assert_eq!(g.m(), 1);
        assert_eq!(g.length(0, Metric::Time), 5);
    }

    #[test]
    fn asymmetric_pair_rejected() {
        let err = Graph::parse_dimacs("p sp 2 2\na 1 2 5\na 2 1 6\n").unwrap_err();
        assert!(matches!(err, Error::InvalidGraph(_)));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = Graph::parse_dimacs("c hi\np sp 3 2\na 1 2 x\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let err = Graph::parse_dimacs("p sp 3 2\nq 1 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn non_positive_weight_rejected() {
        for w in ["0", "-3"] {
            let text = format!("p sp 2 1\na 1 2 {w}\n");
            assert!(matches!(
                Graph::parse_dimacs(&text),
                Err(Error::Parse { line: 2, .. })
            ));
        }
    }

    #[test]
    fn disconnected_rejected_with_component_count() {
        let err = Graph::parse_dimacs("p sp 5 2\na 1 2 1\na 3 4 1\n").unwrap_err();
        assert!(matches!(err, Error::Disconnected { components: 3 }));
    }

    #[test]
    fn canonical_round_trip_and_fingerprint() {
        let text = "p sp 3 4\na 3 2 4\na 2 1 1\na 1 2 1\na 2 3 4\n";
        let g = Graph::parse_dimacs(text).unwrap();
        let canon = g.to_dimacs_string();
        assert_eq!(canon, "p sp 3 4\na 1 2 1\na 2 1 1\na 2 3 4\na 3 2 4\n");
        let again = Graph::parse_dimacs(&canon).unwrap();
        assert_eq!(again.fingerprint(), g.fingerprint());
        assert_eq!(g.fingerprint().len(), 16);
    }

    #[test]
    fn adjacency_is_symmetric() {
        let g = Graph::from_edges(4, [(0, 1, 2), (1, 2, 3), (2, 3, 1), (3, 0, 7)]).unwrap();
        for v in 0..4 {
            for &(w, e) in g.neighbors(v) {
                assert!(g.neighbors(w).contains(&(v, e)));
                assert_eq!(g.edge(e), Edge::new(v, w));
            }
        }
        assert_eq!(g.find_edge(3, 0), Some(1));
    }

    #[test]
    fn hop_metric_is_constant() {
        let g = Graph::from_edges(2, [(0, 1, 9)]).unwrap();
        assert_eq!(g.length(0, Metric::Hop), 1);
        assert!(g.require_metric(Metric::Dist).is_err());
    }
}
