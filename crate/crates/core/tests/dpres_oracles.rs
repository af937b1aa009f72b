use skeledim::dpres::{
    build_range_hub_set, d_scales, verify_d_preserving, DPresLabeling, DQuery, RangeParams,
};
use skeledim::generators::{cycle, path, random_banded, random_unweighted};
use skeledim::graph::{Graph, Metric, NodeId};
use skeledim::hub::PairSelection;
use skeledim::spt::distances_from;

fn check_range_cover(g: &Graph, d: u64, seed: u64) -> usize {
    let p = RangeParams::new(d).unwrap();
    let sets: Vec<Vec<(NodeId, u64)>> = (0..g.n() as NodeId)
        .map(|u| build_range_hub_set(g, u, d, seed).unwrap().hubs())
        .collect();
    let mut checked = 0;
    for u in 0..g.n() as NodeId {
        let du = distances_from(g, u, Metric::Hop);
        for v in 0..g.n() as NodeId {
            let duv = du[v as usize];
            if !(p.d..=p.upper).contains(&duv) {
                continue;
            }
            let best = sets[u as usize]
                .iter()
                .filter_map(|&(w, a)| {
                    sets[v as usize]
                        .binary_search_by_key(&w, |x| x.0)
                        .ok()
                        .map(|j| a + sets[v as usize][j].1)
                })
                .min();
            assert_eq!(best, Some(duv), "pair ({u}, {v}) at D = {d}");
            checked += 1;
        }
    }
    checked
}

#[test]
fn range_cover_is_exact() {
    let mut checked = 0;
    for seed in 0..25u64 {
        let g = random_banded(120 + 3 * seed as usize, 40, 4, seed).unwrap();
        for d in [12, 24] {
            checked += check_range_cover(&g, d, seed);
        }
    }
    for seed in 0..10u64 {
        let g = random_unweighted(150, 20, seed).unwrap();
        checked += check_range_cover(&g, 12, seed);
    }
    assert!(checked > 10_000, "only {checked} pairs exercised");
}

#[test]
fn range_sets_on_a_long_path() {
    let g = path(30).unwrap();
    let s = build_range_hub_set(&g, 0, 12, 0).unwrap();
    assert!(s.heavy.is_empty());
    assert_eq!(s.light_components, vec![10]);
    let far = build_range_hub_set(&g, 29, 12, 0).unwrap();
    assert_eq!(far.light.len(), 10);
}

#[test]
fn combined_scheme_on_a_cycle() {
    let g = cycle(120).unwrap();
    for d_max in [None, Some(24), Some(40), Some(100)] {
        let l = DPresLabeling::build(&g, 24, 2, d_max, true).unwrap();
        let r = verify_d_preserving(&g, &l, 24, PairSelection::Exhaustive).unwrap();
        assert!(r.is_clean());
        assert_eq!(r.pairs, 120 * (61 - 24) * 2 - 120);
    }
}

#[test]
fn combined_scheme_on_random_graphs() {
    for seed in 0..10u64 {
        let g = random_banded(150, 60, 5, 50 + seed).unwrap();
        for d in [12, 20, 30] {
            for d_max in [None, Some(3 * d)] {
                let l = DPresLabeling::build(&g, d, seed, d_max, true).unwrap();
                let r = verify_d_preserving(&g, &l, d, PairSelection::Exhaustive).unwrap();
                assert!(r.is_clean(), "seed {seed} D {d}: {:?}", r.mismatches.first());
            }
        }
    }
}

#[test]
fn path_query() {
    let g = path(50).unwrap();
    let l = DPresLabeling::build(&g, 12, 0, None, false).unwrap();
    assert_eq!(l.query(0, 48).unwrap(), DQuery::Distance(48));
    assert_eq!(l.query(3, 3).unwrap(), DQuery::Distance(0));
    // D above the diameter: nothing to answer
    let empty = DPresLabeling::build(&path(10).unwrap(), 24, 0, None, false).unwrap();
    assert_eq!(empty.stats().max, 0);
    assert_eq!(empty.query(0, 9).unwrap(), DQuery::BelowRange);
}

#[test]
fn scales_cover_every_gap() {
    for d in 12..400 {
        for d_max in [d, d + 7, 2 * d, 10 * d] {
            let s = d_scales(d, d_max).unwrap();
            let mut covered_to = 12 * (d / 12);
            for &x in &s {
                assert!(x <= covered_to, "gap before scale {x}");
                covered_to = RangeParams::new(x).unwrap().upper + 1;
            }
            assert!(s.is_empty() || covered_to >= d_max);
        }
    }
}
