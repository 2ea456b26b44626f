//! Integrability exponents of products of linear forms and of the volume.

mod common;

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;
use ribbonvol::cells::{cell_vertices, default_lengths};
use ribbonvol::quadrature::product_shell;
use ribbonvol::ribbon::{enumerate_trivalent, restriction_types};
use ribbonvol::scalar::{int, ratio, ratio_to_f64};
use ribbonvol::thresholds::{
    closed_form_threshold, global_threshold_universal, local_threshold, local_threshold_unpruned, shat_closed_form,
    shat_product, shat_product_lp, shat_subgraph, LinearFormProduct, Threshold,
};

use common::{instances, rng, SMALL_TYPES};

#[test]
fn small_products() {
    let p = |m: &[Vec<u8>]| shat_product(&LinearFormProduct::from_adjacency(m).unwrap());
    assert_eq!(p(&[vec![1]]), int(1));
    assert_eq!(p(&[vec![1, 1]]), int(2));
    assert_eq!(p(&[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]), int(1));
    assert_eq!(p(&[vec![1, 0], vec![1, 1]]), int(1));
    assert_eq!(p(&[vec![1, 1, 1]]), int(3));
}

#[test]
fn combinatorial_and_linear_programming_exponents_agree() {
    for m in instances() {
        let p = LinearFormProduct::from_adjacency(&m).unwrap();
        assert_eq!(shat_product(&p), shat_product_lp(&p), "{m:?}");
    }
}

#[test]
fn exponent_is_invariant_under_rescaling_and_permutation() {
    let mut r = rng(31);
    for m in instances() {
        let base = shat_product(&LinearFormProduct::from_adjacency(&m).unwrap());
        let coefficients: Vec<Vec<BigRational>> = m
            .iter()
            .map(|row| row.iter().map(|&a| if a == 1 { ratio(r.gen_range(1..50), r.gen_range(1..50)) } else { int(0) }).collect())
            .collect();
        assert_eq!(shat_product(&LinearFormProduct::from_coefficients(coefficients).unwrap()), base);
        let mut rows = m.clone();
        rows.shuffle(&mut r);
        let mut cols: Vec<usize> = (0..m[0].len()).collect();
        cols.shuffle(&mut r);
        let permuted: Vec<Vec<u8>> = rows.iter().map(|row| cols.iter().map(|&j| row[j]).collect()).collect();
        assert_eq!(shat_product(&LinearFormProduct::from_adjacency(&permuted).unwrap()), base);
    }
}

#[test]
fn dyadic_shells_confirm_each_exponent() {
    for m in instances() {
        let p = LinearFormProduct::from_adjacency(&m).unwrap();
        let s = ratio_to_f64(&shat_product(&p));
        let at = product_shell(&p, s, 64) / product_shell(&p, s, 32);
        assert!(at >= 0.8, "{m:?}: ratio {at} at the exponent");
        let below = product_shell(&p, 0.875 * s, 64) / product_shell(&p, 0.875 * s, 32);
        assert!(below <= 0.5, "{m:?}: ratio {below} below the exponent");
    }
}

#[test]
fn connected_subgraph_exponents_follow_the_bivalent_count() {
    for (genus, n) in [(1, 2), (0, 5), (2, 1)] {
        for g in enumerate_trivalent(genus, n).unwrap() {
            for mask in 1u64..1 << g.num_edges() {
                let comps = restriction_types(&g, mask);
                if comps.len() != 1 {
                    continue;
                }
                let Some(expected) = shat_closed_form(&comps[0]) else { continue };
                let edges: Vec<usize> = (0..g.num_edges()).filter(|e| mask >> e & 1 == 1).collect();
                assert_eq!(shat_subgraph(&g, &edges).unwrap().shat, Threshold::Finite(expected));
            }
        }
    }
}

#[test]
fn pruned_local_thresholds_match_the_full_search() {
    for (genus, n) in SMALL_TYPES.into_iter().chain([(0, 5), (1, 3), (2, 1)]) {
        let l = default_lengths(n, &int(20));
        for g in enumerate_trivalent(genus, n).unwrap() {
            for v in cell_vertices(&g, &l).unwrap() {
                let pruned = local_threshold(&g, &l, &v).unwrap().value;
                assert_eq!(pruned, local_threshold_unpruned(&g, &l, &v).unwrap());
            }
        }
    }
}

#[test]
fn witnesses_are_relevant_subgraphs() {
    for (genus, n) in [(0, 4), (0, 5), (1, 1), (1, 2), (1, 3), (2, 1), (2, 2)] {
        let t = global_threshold_universal(genus, n).unwrap();
        assert_eq!(t.value, closed_form_threshold(genus, n).unwrap());
        let w = t.witness.unwrap();
        assert_eq!(w.subgraph.shat, t.value);
        for (&(_, boundaries), &v2) in w.subgraph.components.iter().zip(&w.subgraph.bivalent) {
            assert!(v2 >= boundaries, "({genus},{n}): {:?}", w.subgraph);
        }
        assert!(w.subgraph.edges.iter().all(|e| !w.support.contains(e)));
    }
}
