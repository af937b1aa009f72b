//! Shared per-edge random values for the virtual subdivision.
//!
//! An edge of length `a` is emulated by `12a` unit edges, each with an
//! i.i.d. uniform value `rho_1 .. rho_12a`. Hub selection only ever needs
//! the minimum over a prefix or a suffix of that sequence, so only the
//! prefix minima and suffix minima are generated; their expected number is
//! `2 H(12a) - 1`.
//!
//! Prefix phase: `rho_1` is uniform on `[0, 1)`. Given a prefix minimum of
//! value `p` at index `i`, the gap to the next prefix minimum is geometric
//! with success probability `p` (support `1, 2, ...`) and its value is
//! uniform on `[0, p)`. The last prefix minimum found before index `12a` is
//! the global minimum `m`.
//!
//! Suffix phase: conditioned on the prefix phase, the values after the
//! global minimum are i.i.d. uniform on `(m, 1)`. Their suffix minima are
//! generated backwards from index `12a`: the first value is uniform on
//! `(m, 1)`; given a suffix minimum of value `s`, the gap to the previous
//! one is geometric with success probability `(s - m) / (1 - m)` and its
//! value is uniform on `(m, s)`. Generation stops on reaching the index of
//! the global minimum.
//!
//! Randomness comes from ChaCha streams keyed by `(seed, namespace, id)`, so
//! any process holding the seed reproduces the same chain for an edge
//! without coordination.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::EdgeId;

const NODE_NAMESPACE: u64 = 1 << 62;

/// Keyed random stream for one edge.
pub fn edge_stream(seed: u64, edge: EdgeId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(edge as u64);
    rng
}

/// Keyed random stream for one node, independent from every edge stream.
pub fn node_stream(seed: u64, node: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(NODE_NAMESPACE | node as u64);
    rng
}

/// Uniform node value used by the range scheme.
pub fn node_rho(seed: u64, node: u32) -> f64 {
    node_stream(seed, node).gen::<f64>()
}

/// A random value together with its position, ordered by value and then by
/// `(owner, index)` so that no two distinct positions ever compare equal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RhoValue {
    pub value: f64,
    pub owner: u32,
    pub index: u64,
}

impl Eq for RhoValue {}

impl Ord for RhoValue {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.owner.cmp(&other.owner))
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for RhoValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryKind {
    Prefix,
    Suffix,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainEntry {
    /// 1-based position in the subdivision, counted from the edge's
    /// smaller-id endpoint.
    pub index: u64,
    pub value: f64,
    pub kind: EntryKind,
}

/// Prefix and suffix minima of one edge's virtual sequence, sorted by index.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimaChain {
    edge: EdgeId,
    units: u64,
    entries: Vec<ChainEntry>,
    min_pos: usize,
}

/// Geometric gap on `{1, 2, ...}` with success probability `p`, saturating
/// at `limit + 1` (anything larger just means "past the end").
fn geometric_gap<R: Rng>(rng: &mut R, p: f64, limit: u64) -> u64 {
    let u: f64 = 1.0 - rng.gen::<f64>();
    if p >= 1.0 {
        return 1;
    }
    if p <= 0.0 {
        return limit + 1;
    }
    let failures = u.ln() / (-p).ln_1p();
    if !failures.is_finite() || failures >= limit as f64 {
        limit + 1
    } else {
        failures as u64 + 1
    }
}

/// Samples the minima chain of `edge` subdivided into `units` unit edges.
pub fn sample_minima_chain(seed: u64, edge: EdgeId, units: u64) -> MinimaChain {
    assert!(units >= 1, "an edge has at least one unit");
    let mut rng = edge_stream(seed, edge);

    let mut prefix = Vec::new();
    let mut index = 1u64;
    let mut value: f64 = rng.gen();
    loop {
        prefix.push((index, value));
        let gap = geometric_gap(&mut rng, value, units - index);
        if gap > units - index {
            break;
        }
        index += gap;
        value *= rng.gen::<f64>();
    }
    let (min_index, min_value) = *prefix.last().expect("nonempty");

    let mut suffix = Vec::new();
    if min_index < units {
        let span = 1.0 - min_value;
        let mut index = units;
        let mut value = min_value + span * (1.0 - rng.gen::<f64>());
        loop {
            suffix.push((index, value));
            let p = (value - min_value) / span;
            let gap = geometric_gap(&mut rng, p, index - min_index);
            if gap >= index - min_index {
                break;
            }
            index -= gap;
            value = min_value + (value - min_value) * (1.0 - rng.gen::<f64>());
        }
    }

    let mut entries: Vec<ChainEntry> = prefix
        .iter()
        .map(|&(index, value)| ChainEntry {
            index,
            value,
            kind: EntryKind::Prefix,
        })
        .collect();
    let min_pos = entries.len() - 1;
    entries[min_pos].kind = EntryKind::Both;
    entries.extend(suffix.iter().rev().map(|&(index, value)| ChainEntry {
        index,
        value,
        kind: EntryKind::Suffix,
    }));
    MinimaChain {
        edge,
        units,
        entries,
        min_pos,
    }
}

impl MinimaChain {
    pub fn edge(&self) -> EdgeId {
        self.edge
    }

    pub fn units(&self) -> u64 {
        self.units
    }

    pub fn entries(&self) -> &[ChainEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn at(&self, pos: usize) -> RhoValue {
        let e = &self.entries[pos];
        RhoValue {
            value: e.value,
            owner: self.edge,
            index: e.index,
        }
    }

    pub fn global_min(&self) -> RhoValue {
        self.at(self.min_pos)
    }

    /// Minimum over units `1..=j`.
    pub fn prefix_min(&self, j: u64) -> RhoValue {
        debug_assert!(j >= 1 && j <= self.units);
        let prefix = &self.entries[..=self.min_pos];
        let pos = prefix.partition_point(|e| e.index <= j);
        self.at(pos - 1)
    }

    /// Minimum over units `j..=units`.
    pub fn suffix_min(&self, j: u64) -> RhoValue {
        debug_assert!(j >= 1 && j <= self.units);
        let suffix = &self.entries[self.min_pos..];
        let pos = suffix.partition_point(|e| e.index < j);
        self.at(self.min_pos + pos.min(suffix.len() - 1))
    }

    /// Minimum over units `lo..=hi` when the range touches either end of
    /// the edge; `None` for strictly interior ranges, which the chain alone
    /// cannot answer.
    pub fn window_min(&self, lo: u64, hi: u64) -> Option<RhoValue> {
        debug_assert!(1 <= lo && lo <= hi && hi <= self.units);
        if lo == 1 {
            Some(self.prefix_min(hi))
        } else if hi == self.units {
            Some(self.suffix_min(lo))
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_unit_chain() {
        let c = sample_minima_chain(7, 3, 1);
        assert_eq!(c.len(), 1);
        assert_eq!(c.entries()[0].index, 1);
        assert_eq!(c.entries()[0].kind, EntryKind::Both);
    }

    #[test]
    fn chain_structure() {
        for seed in 0..200 {
            for units in [2u64, 12, 120, 1200, 120_000] {
                let c = sample_minima_chain(seed, 5, units);
                let e = c.entries();
                assert_eq!(e[0].index, 1);
                assert!(e.windows(2).all(|w| w[0].index < w[1].index));
                assert!(e.iter().all(|x| x.index <= units));
                let both: Vec<_> = e.iter().filter(|x| x.kind == EntryKind::Both).collect();
                assert_eq!(both.len(), 1);
                let min = both[0].value;
                assert!(e.iter().all(|x| x.value >= min));
                // prefix values decrease, suffix values increase with index
                let m = c.min_pos;
                assert!(e[..=m].windows(2).all(|w| w[0].value > w[1].value));
                assert!(e[m..].windows(2).all(|w| w[0].value < w[1].value));
                if m + 1 < e.len() {
                    assert_eq!(e.last().unwrap().index, units);
                }
            }
        }
    }

    #[test]
    fn chain_is_deterministic() {
        assert_eq!(sample_minima_chain(1, 2, 96), sample_minima_chain(1, 2, 96));
        assert_ne!(sample_minima_chain(1, 2, 96), sample_minima_chain(1, 3, 96));
    }

    #[test]
    fn prefix_and_suffix_queries() {
        let c = sample_minima_chain(11, 0, 240);
        assert_eq!(c.prefix_min(240), c.global_min());
        assert_eq!(c.suffix_min(1), c.global_min());
        assert_eq!(c.prefix_min(1).index, 1);
        assert_eq!(c.window_min(1, 240), Some(c.global_min()));
        assert!(c.window_min(2, 239).is_none());
        let last = c.suffix_min(240);
        assert_eq!(last.index, 240);
    }

    #[test]
    fn rho_order_breaks_ties() {
        let a = RhoValue { value: 0.5, owner: 1, index: 3 };
        let b = RhoValue { value: 0.5, owner: 1, index: 4 };
        let c = RhoValue { value: 0.5, owner: 0, index: 9 };
        assert!(c < a && a < b);
    }

    #[test]
    fn node_values_are_namespaced() {
        let v = node_rho(3, 0);
        let e: f64 = edge_stream(3, 0).gen();
        assert_ne!(v, e);
        assert_eq!(v, node_rho(3, 0));
    }
}
