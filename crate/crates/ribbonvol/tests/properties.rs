//! Randomised properties over small graphs and exact lengths.

use num_rational::BigRational;
use proptest::prelude::*;
use ribbonvol::bvol::bcomb;
use ribbonvol::cells::is_nonresonant;
use ribbonvol::ribbon::{automorphism_group, enumerate_reduced, enumerate_trivalent, RibbonGraph};
use ribbonvol::scalar::{format_rational, parse_rational, ratio};

fn graphs() -> Vec<RibbonGraph> {
    [(0, 4), (1, 1), (1, 2)].iter().flat_map(|&(g, n)| enumerate_trivalent(g, n).unwrap()).collect()
}

fn lengths(k: usize) -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec((1i64..60, 1i64..12), k).prop_map(|v| v.into_iter().map(|(p, q)| ratio(p, q)).collect())
}

fn graph_and_lengths() -> impl Strategy<Value = (RibbonGraph, Vec<BigRational>)> {
    prop::sample::select(graphs()).prop_flat_map(|g| {
        let e = g.num_edges();
        (Just(g), lengths(e))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn volume_is_invariant_under_automorphisms((g, l) in graph_and_lengths()) {
        let value = bcomb(&g, &l).unwrap();
        for act in automorphism_group(&g).edge_action {
            let moved: Vec<BigRational> = (0..l.len()).map(|e| l[act[e]].clone()).collect();
            prop_assert_eq!(bcomb(&g, &moved).unwrap(), value.clone());
        }
    }

    #[test]
    fn volume_is_homogeneous((g, l) in graph_and_lengths(), p in 1i64..9, q in 1i64..9) {
        let t = ratio(p, q);
        let scaled: Vec<BigRational> = l.iter().map(|x| x * &t).collect();
        let d = 6 * g.genus() + 2 * g.num_faces() - 6;
        let expected = bcomb(&g, &l).unwrap() / num_traits::pow(t, d);
        prop_assert_eq!(bcomb(&g, &scaled).unwrap(), expected);
    }

    #[test]
    fn relabelled_darts_give_the_same_class(
        index in 0usize..64,
        perm in Just((0..64).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let pool = enumerate_reduced(1, 2).unwrap();
        let g = &pool[index % pool.len()];
        let m = g.num_darts();
        let order: Vec<usize> = perm.into_iter().filter(|&d| d < m).collect();
        let mut sigma = vec![0; m];
        let mut iota = vec![0; m];
        let mut labels = vec![0; m];
        for d in 0..m {
            sigma[order[d]] = order[g.sigma()[d]];
            iota[order[d]] = order[g.iota()[d]];
            labels[order[d]] = g.face_labels()[d];
        }
        let h = RibbonGraph::new(sigma, iota, labels).unwrap();
        prop_assert_eq!(h.canonical_code(true), g.canonical_code(true));
        prop_assert!(h.is_isomorphic(g));
        prop_assert_eq!(automorphism_group(&h).order, automorphism_group(g).order);
    }

    #[test]
    fn resonance_ignores_order_and_scale(l in lengths(4), p in 1i64..20) {
        let t = ratio(p, 7);
        let scaled: Vec<BigRational> = l.iter().rev().map(|x| x * &t).collect();
        prop_assert_eq!(is_nonresonant(&l), is_nonresonant(&scaled));
    }

    #[test]
    fn rationals_round_trip(p in -10_000i64..10_000, q in 1i64..10_000) {
        let x = ratio(p, q);
        prop_assert_eq!(parse_rational(&format_rational(&x)).unwrap(), x);
    }
}
