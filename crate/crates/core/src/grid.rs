//! The perturbed grid family `G_L`.
//!
//! `G_L` is the `2^L x 2^L` grid with nodes `(x, y)`, `1 <= x, y <= 2^L`.
//! With `D = 2^(L+3)` and `Q = 1 + 2^L`, the horizontal edge leaving
//! `(x, y)` has length `Q((D+2)L - j)` where `2^j` is the largest power of
//! two dividing its row `y`, and the vertical edge leaving `(x, y)` has
//! length `Q((D+2)L - i) - x` where `2^i` divides its column `x`. Rows and
//! columns at multiples of large powers of two act as arteries, and among
//! otherwise equal routes the one whose vertical moves run further right is
//! preferred, which makes every shortest path unique.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

pub const MAX_LEVEL: u32 = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub level: u32,
}

impl GridSpec {
    pub fn new(level: u32) -> Result<Self> {
        if !(1..=MAX_LEVEL).contains(&level) {
            return Err(Error::Parameter(format!(
                "grid level must be in 1..={MAX_LEVEL}, got {level}"
            )));
        }
        Ok(GridSpec { level })
    }

    pub fn side(&self) -> u64 {
        1 << self.level
    }

    pub fn n(&self) -> usize {
        (self.side() * self.side()) as usize
    }

    pub fn d(&self) -> u64 {
        1 << (self.level + 3)
    }

    pub fn q(&self) -> u64 {
        1 + self.side()
    }

    /// Base of every edge length before the power-of-two discount.
    fn base(&self) -> u64 {
        (self.d() + 2) * self.level as u64
    }

    /// Length of the edge `(x, y) - (x + 1, y)`.
    pub fn horizontal(&self, _x: u64, y: u64) -> u64 {
        self.q() * (self.base() - y.trailing_zeros() as u64)
    }

    /// Length of the edge `(x, y) - (x, y + 1)`.
    pub fn vertical(&self, x: u64, _y: u64) -> u64 {
        self.q() * (self.base() - x.trailing_zeros() as u64) - x
    }

    /// Node id of `(x, y)`, 1-based coordinates.
    pub fn node(&self, x: u64, y: u64) -> NodeId {
        ((y - 1) * self.side() + (x - 1)) as NodeId
    }

    pub fn coords(&self, v: NodeId) -> (u64, u64) {
        let v = v as u64;
        (v % self.side() + 1, v / self.side() + 1)
    }

    /// Radius of the corner ball used for the packing lower bound: the
    /// length scale of `2^L` grid steps.
    pub fn corner_radius(&self) -> u64 {
        self.q() * self.base() * self.side()
    }
}

pub fn generate_grid(level: u32) -> Result<Graph> {
    let spec = GridSpec::new(level)?;
    let s = spec.side();
    let mut edges = Vec::with_capacity(2 * spec.n());
    for y in 1..=s {
        for x in 1..=s {
            if x < s {
                edges.push((spec.node(x, y), spec.node(x + 1, y), spec.horizontal(x, y)));
            }
            if y < s {
                edges.push((spec.node(x, y), spec.node(x, y + 1), spec.vertical(x, y)));
            }
        }
    }
    Graph::from_edges(spec.n(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Metric;

    #[test]
    fn level_one_lengths() {
        // Q = 3, D = 16, base 18
        let g = generate_grid(1).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.m(), 4);
        let len = |a, b| g.length(g.find_edge(a, b).unwrap(), Metric::Time);
        assert_eq!(len(0, 1), 54);
        assert_eq!(len(2, 3), 51);
        assert_eq!(len(0, 2), 53);
        assert_eq!(len(1, 3), 49);
    }

    #[test]
    fn range_and_positivity() {
        assert!(generate_grid(0).is_err());
        assert!(generate_grid(8).is_err());
        for l in 1..=5 {
            let g = generate_grid(l).unwrap();
            assert!((0..g.m() as u32).all(|e| g.length(e, Metric::Time) > 0));
        }
    }

    #[test]
    fn coordinates_round_trip() {
        let s = GridSpec::new(3).unwrap();
        for v in 0..s.n() as NodeId {
            let (x, y) = s.coords(v);
            assert_eq!(s.node(x, y), v);
        }
    }
}
