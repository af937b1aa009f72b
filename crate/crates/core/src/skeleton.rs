//! Tree skeletons, their width and the skeleton dimension of a graph.
//!
//! A skeleton keeps every point of the (continuous) shortest-path tree whose
//! reach is at least `alpha` times its distance from the root, both measured
//! with a chosen reach metric. Kept real nodes carry their full parent edge;
//! a pruned child contributes a truncated piece of its parent edge ending at
//! the point where `reach == alpha * dist`.
//!
//! All radii are exact. For `alpha = p/q` the truncation point of an edge
//! into a pruned node `w` lies at `q * (d(w) + reach(w)) / (p + q)`, so every
//! radius is stored as an integer numerator over the common denominator
//! `p + q`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, Metric, NodeId};
use crate::spt::{shortest_path_tree, ShortestPathTree};

/// Number of virtual unit edges per unit of length.
pub const SUBDIVISION: u64 = 12;

/// Positive rational reach threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Alpha(Ratio<i64>);

impl Alpha {
    pub fn new(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Parameter("alpha has a zero denominator".into()));
        }
        Self::from_ratio(Ratio::new(p, q))
    }

    pub fn from_ratio(r: Ratio<i64>) -> Result<Self> {
        if *r.numer() <= 0 {
            return Err(Error::Parameter(format!("alpha must be positive, got {r}")));
        }
        Ok(Alpha(r))
    }

    pub fn half() -> Self {
        Alpha(Ratio::new(1, 2))
    }

    pub fn ratio(self) -> Ratio<i64> {
        self.0
    }

    pub fn numer(self) -> u128 {
        *self.0.numer() as u128
    }

    pub fn denom(self) -> u128 {
        *self.0.denom() as u128
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parameter(format!("cannot parse `{s}` as a rational p/q"));
        match s.split_once('/') {
            Some((p, q)) => Alpha::new(
                p.trim().parse().map_err(|_| bad())?,
                q.trim().parse().map_err(|_| bad())?,
            ),
            None => Alpha::new(s.trim().parse().map_err(|_| bad())?, 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SkeletonParams {
    pub reach_metric: Metric,
    pub alpha: Alpha,
}

impl Default for SkeletonParams {
    fn default() -> Self {
        SkeletonParams {
            reach_metric: Metric::Time,
            alpha: Alpha::half(),
        }
    }
}

impl SkeletonParams {
    pub fn with_alpha(alpha: Alpha) -> Self {
        SkeletonParams {
            alpha,
            ..Default::default()
        }
    }
}

/// Formats `num / den` in lowest terms as `p/q`.
pub fn format_ratio(num: u128, den: u128) -> String {
    let g = num.gcd(&den).max(1);
    format!("{}/{}", num / g, den / g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SkeletonEdge {
    pub edge: EdgeId,
    pub parent: NodeId,
    pub child: NodeId,
    /// `true` when the child itself is kept and the whole edge belongs to
    /// the skeleton.
    pub full: bool,
    near: u128,
    far: u128,
}

impl SkeletonEdge {
    /// Scaled distance of the parent end (numerator over the skeleton's
    /// denominator).
    pub fn near(&self) -> u128 {
        self.near
    }

    /// Scaled distance of the far end of the kept piece.
    pub fn far(&self) -> u128 {
        self.far
    }
}

#[derive(Clone, Debug)]
pub struct DiscreteSkeleton {
    root: NodeId,
    params: SkeletonParams,
    den: u128,
    edges: Vec<SkeletonEdge>,
    kept: Vec<(NodeId, u64)>,
}

impl DiscreteSkeleton {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn params(&self) -> SkeletonParams {
        self.params
    }

    /// Common denominator of all stored radii.
    pub fn den(&self) -> u128 {
        self.den
    }

    pub fn edges(&self) -> &[SkeletonEdge] {
        &self.edges
    }

    /// Kept tree nodes with their reach-metric distance from the root.
    pub fn kept_nodes(&self) -> &[(NodeId, u64)] {
        &self.kept
    }

    pub fn is_kept(&self, v: NodeId) -> bool {
        self.kept.iter().any(|&(w, _)| w == v)
    }

    /// Length of the kept piece of an edge, as an exact rational.
    pub fn kept_length(&self, e: &SkeletonEdge) -> Ratio<i128> {
        Ratio::new((e.far - e.near) as i128, self.den as i128)
    }

    pub fn far_radius(&self, e: &SkeletonEdge) -> Ratio<i128> {
        Ratio::new(e.far as i128, self.den as i128)
    }

    /// Largest radius reached by the skeleton.
    pub fn depth(&self) -> Ratio<i128> {
        let far = self.edges.iter().map(|e| e.far).max().unwrap_or(0);
        Ratio::new(far as i128, self.den as i128)
    }

    /// Skeleton edges containing a point at distance exactly `num / den`
    /// from the root.
    pub fn cut_at(&self, num: u128, den: u128) -> impl Iterator<Item = &SkeletonEdge> + '_ {
        let own = self.den;
        self.edges
            .iter()
            .filter(move |e| e.near * den < num * own && num * own <= e.far * den)
    }

    pub fn profile(&self) -> CutProfile {
        cut_profile(self)
    }

    pub fn width(&self) -> u32 {
        self.profile().width()
    }
}

/// Extracts the skeleton of `tree`, measuring distance and reach with
/// `params.reach_metric` along the tree's own branches.
pub fn compute_skeleton(
    g: &Graph,
    tree: &ShortestPathTree,
    params: SkeletonParams,
) -> Result<DiscreteSkeleton> {
    g.require_metric(params.reach_metric)?;
    let metric = params.reach_metric;
    let (p, q) = (params.alpha.numer(), params.alpha.denom());
    let den = p + q;
    let n = tree.len();

    let mut dist = vec![0u64; n];
    for &v in tree.order() {
        if let Some((parent, e)) = tree.parent(v) {
            dist[v as usize] = dist[parent as usize] + g.length(e, metric);
        }
    }
    let mut deepest = dist.clone();
    for &v in tree.order().iter().rev() {
        if let Some((parent, _)) = tree.parent(v) {
            if deepest[v as usize] > deepest[parent as usize] {
                deepest[parent as usize] = deepest[v as usize];
            }
        }
    }
    let keep = |v: usize| q * (deepest[v] - dist[v]) as u128 >= p * dist[v] as u128;

    let mut edges = Vec::new();
    let mut kept = Vec::new();
    for &v in tree.order() {
        let vi = v as usize;
        let Some((parent, e)) = tree.parent(v) else {
            kept.push((v, 0));
            continue;
        };
        if !keep(parent as usize) {
            continue;
        }
        let near = dist[parent as usize] as u128 * den;
        if keep(vi) {
            kept.push((v, dist[vi]));
            edges.push(SkeletonEdge {
                edge: e,
                parent,
                child: v,
                full: true,
                near,
                far: dist[vi] as u128 * den,
            });
        } else {
            let far = q * deepest[vi] as u128;
            if far > near {
                edges.push(SkeletonEdge {
                    edge: e,
                    parent,
                    child: v,
                    full: false,
                    near,
                    far,
                });
            }
        }
    }

    Ok(DiscreteSkeleton {
        root: tree.root(),
        params,
        den,
        edges,
        kept,
    })
}

/// Number of skeleton points at distance `r`, for `r` in the half-open
/// interval `(from, to]` (both scaled by `den`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CutSegment {
    pub from: u128,
    pub to: u128,
    pub count: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutProfile {
    pub den: u128,
    pub segments: Vec<CutSegment>,
}

impl CutProfile {
    pub fn width(&self) -> u32 {
        self.segments.iter().map(|s| s.count).max().unwrap_or(0)
    }

    /// Cut size at radius `num / den`.
    pub fn count_at(&self, num: u128, den: u128) -> u32 {
        self.segments
            .iter()
            .find(|s| s.from * den < num * self.den && num * self.den <= s.to * den)
            .map_or(0, |s| s.count)
    }
}

/// Distance-ordered sweep: an edge is open on `(near, far]`.
fn cut_profile(s: &DiscreteSkeleton) -> CutProfile {
    let mut events: Vec<(u128, i32)> = Vec::with_capacity(2 * s.edges.len());
    for e in &s.edges {
        events.push((e.near, 1));
        events.push((e.far, -1));
    }
    events.sort_unstable();
    let mut segments = Vec::new();
    let mut open: i32 = 0;
    let mut i = 0;
    while i < events.len() {
        let at = events[i].0;
        while i < events.len() && events[i].0 == at {
            open += events[i].1;
            i += 1;
        }
        if let Some(&(next, _)) = events.get(i) {
            if open > 0 {
                segments.push(CutSegment {
                    from: at,
                    to: next,
                    count: open as u32,
                });
            }
        }
    }
    debug_assert_eq!(open, 0);
    CutProfile {
        den: s.den,
        segments,
    }
}

/// `H(n) = 1 + 1/2 + ... + 1/n`.
fn harmonic(n: u64) -> f64 {
    if n < 64 {
        return (1..=n).rev().map(|k| 1.0 / k as f64).sum();
    }
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    let x = n as f64;
    let inv2 = 1.0 / (x * x);
    x.ln() + EULER_GAMMA + 0.5 / x - inv2 / 12.0 + inv2 * inv2 / 120.0 - inv2 * inv2 * inv2 / 252.0
}

/// `sum_{t = lo + 1}^{hi} 1/t`.
fn harmonic_range(lo: u64, hi: u64) -> f64 {
    if hi <= lo {
        0.0
    } else if hi - lo <= 256 {
        ((lo + 1)..=hi).rev().map(|t| 1.0 / t as f64).sum()
    } else {
        harmonic(hi) - harmonic(lo)
    }
}

/// Sum of `1/t` over the points of the 12x-subdivided skeleton at virtual
/// distance `t > cutoff`. A cutoff of zero gives the integrated skeleton
/// dimension of the root; `cutoff = 2 * D` (i.e. `D/6` measured in virtual
/// units of a distance-`D` threshold) gives the D-restricted variant.
pub fn integrated_skeleton_dimension(s: &DiscreteSkeleton, cutoff: u64) -> f64 {
    let mut total = 0.0;
    for e in &s.edges {
        let lo = (SUBDIVISION as u128 * e.near / s.den) as u64;
        let hi = (SUBDIVISION as u128 * e.far / s.den) as u64;
        total += harmonic_range(lo.max(cutoff), hi);
    }
    total
}

/// Cutoff in virtual units used for the D-restricted integrated dimension.
pub fn isk_cutoff_for(d: u64) -> u64 {
    SUBDIVISION * d / 6
}

#[derive(Clone, Debug)]
pub enum RootSelection {
    All,
    Sample { count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootStats {
    pub root: NodeId,
    pub width: u32,
    pub isk: f64,
    pub isk_restricted: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SkeletonStats {
    pub params: SkeletonParams,
    pub per_root: Vec<RootStats>,
    /// Maximum width over the selected roots. Exact when every root was
    /// examined, otherwise a lower bound.
    pub k: u32,
    pub exhaustive: bool,
    pub isk_cutoff: Option<u64>,
}

impl SkeletonStats {
    pub fn avg_width(&self) -> f64 {
        mean(self.per_root.iter().map(|r| r.width as f64))
    }

    pub fn isk_avg(&self) -> f64 {
        mean(self.per_root.iter().map(|r| r.isk))
    }

    pub fn isk_restricted_avg(&self) -> Option<f64> {
        self.isk_cutoff?;
        Some(mean(self.per_root.iter().filter_map(|r| r.isk_restricted)))
    }

    pub fn width_histogram(&self) -> BTreeMap<u32, usize> {
        let mut h = BTreeMap::new();
        for r in &self.per_root {
            *h.entry(r.width).or_insert(0) += 1;
        }
        h
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

pub fn select_roots(g: &Graph, selection: &RootSelection) -> Vec<NodeId> {
    match *selection {
        RootSelection::All => (0..g.n() as NodeId).collect(),
        RootSelection::Sample { count, seed } if count < g.n() => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut roots: Vec<NodeId> = sample(&mut rng, g.n(), count)
                .into_iter()
                .map(|v| v as NodeId)
                .collect();
            roots.sort_unstable();
            roots
        }
        RootSelection::Sample { .. } => (0..g.n() as NodeId).collect(),
    }
}

/// Width of the skeleton of every selected root's shortest-path tree (trees
/// are built with the primary `time` metric).
pub fn skeleton_dimension(
    g: &Graph,
    selection: &RootSelection,
    params: SkeletonParams,
    isk_cutoff: Option<u64>,
) -> Result<SkeletonStats> {
    g.require_metric(params.reach_metric)?;
    let roots = select_roots(g, selection);
    let exhaustive = roots.len() == g.n();
    let per_root = roots
        .par_iter()
        .map(|&root| {
            let tree = shortest_path_tree(g, root, Metric::Time)?;
            let s = compute_skeleton(g, &tree, params)?;
            Ok(RootStats {
                root,
                width: s.width(),
                isk: integrated_skeleton_dimension(&s, 0),
                isk_restricted: isk_cutoff.map(|c| integrated_skeleton_dimension(&s, c)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let k = per_root.iter().map(|r| r.width).max().unwrap_or(0);
    Ok(SkeletonStats {
        params,
        per_root,
        k,
        exhaustive,
        isk_cutoff,
    })
}

/// Exact skeleton dimension (all roots) for the given threshold, with the
/// default reach metric.
pub fn k_alpha(g: &Graph, alpha: Alpha) -> Result<u32> {
    Ok(skeleton_dimension(g, &RootSelection::All, SkeletonParams::with_alpha(alpha), None)?.k)
}

/// Centers of balls of radius `r` covering `B(u, 19r/9)`: the root plus the
/// far endpoints of the skeleton edges crossing radii `2r/3` and `10r/9`.
pub fn doubling_cover(g: &Graph, u: NodeId, r: u64) -> Result<Vec<NodeId>> {
    if r == 0 {
        return Err(Error::Parameter("cover radius must be at least 1".into()));
    }
    let tree = shortest_path_tree(g, u, Metric::Time)?;
    let s = compute_skeleton(g, &tree, SkeletonParams::default())?;
    let r = r as u128;
    let mut centers = vec![u];
    centers.extend(s.cut_at(2 * r, 3).map(|e| e.child));
    centers.extend(s.cut_at(10 * r, 9).map(|e| e.child));
    centers.sort_unstable();
    centers.dedup();
    Ok(centers)
}

#[derive(Clone, Debug)]
pub struct AlphaReport {
    pub alpha: Alpha,
    pub beta: Alpha,
    pub k_alpha: u32,
    pub k_beta: u32,
    /// Threshold `(beta + 1) / (beta/alpha - 1)`; undefined when `alpha == beta`.
    pub gamma: Option<Alpha>,
    pub k_gamma: Option<u32>,
}

impl AlphaReport {
    pub fn holds(&self) -> bool {
        let lower = self.k_beta <= self.k_alpha;
        match self.k_gamma {
            Some(kg) => lower && self.k_alpha <= self.k_beta * kg,
            None => self.k_alpha == self.k_beta,
        }
    }
}

/// Computes `k_alpha`, `k_beta` and `k_gamma` for the two-threshold bounds
/// `k_beta <= k_alpha <= k_beta * k_gamma`.
pub fn alpha_relation_check(g: &Graph, alpha: Alpha, beta: Alpha) -> Result<AlphaReport> {
    if alpha > beta {
        return Err(Error::Parameter(format!(
            "expected alpha <= beta, got {alpha} > {beta}"
        )));
    }
    let k_a = k_alpha(g, alpha)?;
    let k_b = if alpha == beta { k_a } else { k_alpha(g, beta)? };
    let gamma = if alpha == beta {
        None
    } else {
        let (a, b) = (alpha.ratio(), beta.ratio());
        let one = Ratio::from_integer(1);
        Some(Alpha::from_ratio((b + one) / (b / a - one))?)
    };
    let k_gamma = gamma.map(|gm| k_alpha(g, gm)).transpose()?;
    Ok(AlphaReport {
        alpha,
        beta,
        k_alpha: k_a,
        k_beta: k_b,
        gamma,
        k_gamma,
    })
}
