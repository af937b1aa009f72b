use num_rational::Ratio;
use skeledim::generators::{corpus, path, random_connected, star};
use skeledim::graph::{Graph, Metric, NodeId};
use skeledim::skeleton::{
    alpha_relation_check, compute_skeleton, doubling_cover, integrated_skeleton_dimension,
    k_alpha, skeleton_dimension, Alpha, RootSelection, SkeletonParams,
};
use skeledim::spt::{bounded_distances, distances_from, shortest_path_tree};

/// Width of the skeleton computed on the tree with every edge replaced by
/// `12 * length` unit edges: a unit node at depth `t` is kept when its reach
/// is at least `alpha * t`, and the width is the largest number of kept unit
/// nodes at one depth.
fn subdivided_width(g: &Graph, root: NodeId, alpha: Alpha) -> u32 {
    let tree = shortest_path_tree(g, root, Metric::Time).unwrap();
    // explicit subdivided tree: parent pointers and depths
    let mut parent: Vec<usize> = vec![usize::MAX];
    let mut depth: Vec<u64> = vec![0];
    let mut image = vec![usize::MAX; g.n()];
    image[root as usize] = 0;
    for &v in tree.order() {
        let Some((p, e)) = tree.parent(v) else { continue };
        let mut prev = image[p as usize];
        for _ in 0..12 * g.length(e, Metric::Time) {
            parent.push(prev);
            depth.push(depth[prev] + 1);
            prev = parent.len() - 1;
        }
        image[v as usize] = prev;
    }
    let m = parent.len();
    let mut deepest = depth.clone();
    for x in (1..m).rev() {
        let p = parent[x];
        deepest[p] = deepest[p].max(deepest[x]);
    }
    let (num, den) = (alpha.numer() as u64, alpha.denom() as u64);
    let mut count = std::collections::HashMap::new();
    for x in 1..m {
        let reach = deepest[x] - depth[x];
        if den * reach >= num * depth[x] {
            *count.entry(depth[x]).or_insert(0u32) += 1;
        }
    }
    count.values().copied().max().unwrap_or(0).max(1)
}

#[test]
fn discrete_width_matches_subdivision() {
    for (name, g) in corpus() {
        if g.total_length(Metric::Time) > 2000 {
            continue;
        }
        for alpha in [Alpha::half(), Alpha::new(1, 3).unwrap(), Alpha::new(1, 1).unwrap()] {
            let params = SkeletonParams::with_alpha(alpha);
            for root in 0..g.n() as NodeId {
                let tree = shortest_path_tree(&g, root, Metric::Time).unwrap();
                let s = compute_skeleton(&g, &tree, params).unwrap();
                assert_eq!(s.width(), subdivided_width(&g, root, alpha), "{name} root {root} alpha {alpha}");
            }
        }
    }
}

#[test]
fn closed_forms() {
    for n in 3..12 {
        assert_eq!(k_alpha(&path(n).unwrap(), Alpha::half()).unwrap(), 2);
    }
    for m in 1..9 {
        assert_eq!(k_alpha(&star(m).unwrap(), Alpha::half()).unwrap(), m as u32);
    }
    let g = star(4).unwrap();
    let tree = shortest_path_tree(&g, 0, Metric::Time).unwrap();
    let s = compute_skeleton(&g, &tree, SkeletonParams::default()).unwrap();
    assert_eq!(s.edges().len(), 4);
    for e in s.edges() {
        assert_eq!(s.kept_length(e), Ratio::new(2, 3));
    }
}

#[test]
fn isk_matches_direct_sum() {
    // sum over unit depths t > cutoff of (kept points at t) / t
    for (_, g) in corpus().into_iter().take(8) {
        for root in 0..g.n() as NodeId {
            let tree = shortest_path_tree(&g, root, Metric::Time).unwrap();
            let s = compute_skeleton(&g, &tree, SkeletonParams::default()).unwrap();
            let depth = 12 * tree.dists().iter().max().unwrap();
            let direct: f64 = (1..=depth)
                .map(|t| s.cut_at(t as u128, 12).count() as f64 / t as f64)
                .sum();
            let fast = integrated_skeleton_dimension(&s, 0);
            assert!((direct - fast).abs() < 1e-9 * direct.max(1.0), "{direct} vs {fast}");
        }
    }
}

#[test]
fn doubling_covers_are_valid() {
    for seed in 0..30 {
        let g = random_connected(60, 30, 20, 300 + seed).unwrap();
        let k = k_alpha(&g, Alpha::half()).unwrap() as usize;
        for u in [0, 17, 42] {
            for r in [1, 5, 20, 60, 200] {
                let centers = doubling_cover(&g, u, r).unwrap();
                assert!(centers.len() <= 2 * k + 1);
                let near: Vec<Vec<u64>> =
                    centers.iter().map(|&c| distances_from(&g, c, Metric::Time)).collect();
                let ball = bounded_distances(&g, u, Metric::Time, 19 * r / 9);
                for v in (0..g.n()).filter(|&v| ball[v].is_some()) {
                    assert!(near.iter().any(|d| d[v] <= r), "seed {seed} u {u} r {r} v {v}");
                }
            }
        }
    }
}

#[test]
fn alpha_relations_hold_on_corpus() {
    let pairs = [
        (Alpha::new(1, 3).unwrap(), Alpha::half()),
        (Alpha::half(), Alpha::new(1, 1).unwrap()),
    ];
    for (name, g) in corpus() {
        for (a, b) in pairs {
            let report = alpha_relation_check(&g, a, b).unwrap();
            assert!(report.holds(), "{name}: {report:?}");
        }
    }
}

#[test]
fn sampled_dimension_bounds_exact() {
    let g = random_connected(80, 40, 20, 5).unwrap();
    let exact = skeleton_dimension(&g, &RootSelection::All, SkeletonParams::default(), None).unwrap();
    let sampled = skeleton_dimension(
        &g,
        &RootSelection::Sample { count: 10, seed: 1 },
        SkeletonParams::default(),
        None,
    )
    .unwrap();
    assert!(exact.exhaustive && !sampled.exhaustive);
    assert!(sampled.k <= exact.k);
}
