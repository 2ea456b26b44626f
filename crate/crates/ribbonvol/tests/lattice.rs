//! Sums of powers of the volume over integral metrics.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use ribbonvol::latticesum::{
    codimension_one_n11, enumerate_integer_metrics, lattice_sum, lattice_sum_with, n11_closed_form, LatticeOptions,
    LatticeValue, Precision,
};
use ribbonvol::ribbon::{automorphism_group, enumerate_reduced, RibbonGraph};
use ribbonvol::scalar::{int, ratio};

fn exact(v: &LatticeValue) -> BigRational {
    v.exact().expect("exact value").clone()
}

#[test]
fn torus_sums_match_the_closed_form() {
    for l in (2..=40).step_by(2) {
        let direct: BigRational =
            (1..l / 2).map(|k| BigRational::new(1.into(), BigInt::from(k * k))).sum::<BigRational>() / int(4);
        assert_eq!(n11_closed_form(l).unwrap(), direct);
        assert_eq!(exact(&lattice_sum(1, 1, &[int(l as i64)], 1.0).unwrap().value), direct, "L={l}");
    }
}

#[test]
fn positive_codimension_part_of_the_torus_sum() {
    for l in (4..=30).step_by(2) {
        let b = [int(l as i64)];
        let full = exact(&lattice_sum(1, 1, &b, 1.0).unwrap().value);
        let options = LatticeOptions { trivalent_only: true, ..Default::default() };
        let tri = exact(&lattice_sum_with(1, 1, &b, 1.0, options).unwrap().value);
        assert_eq!(full - tri, codimension_one_n11(l / 2));
    }
}

#[test]
fn boundary_order_does_not_matter() {
    for (a, b) in [(4, 6), (3, 7), (5, 9), (2, 10)] {
        let x = lattice_sum(1, 2, &[int(a), int(b)], 1.0).unwrap();
        let y = lattice_sum(1, 2, &[int(b), int(a)], 1.0).unwrap();
        assert_eq!(exact(&x.value), exact(&y.value));
        assert_eq!(x.metrics, y.metrics);
    }
}

#[test]
fn empty_lattices() {
    let odd = lattice_sum(1, 2, &[int(3), int(4)], 1.0).unwrap();
    assert!(odd.empty_lattice && exact(&odd.value).is_zero());
    let fractional = lattice_sum(1, 1, &[ratio(13, 2)], 0.5).unwrap();
    assert!(fractional.empty_lattice && fractional.value.to_f64() == 0.0);
}

/// Positive integer metrics with the given perimeters, by exhaustive search.
fn count_metrics(g: &RibbonGraph, boundary: &[u64]) -> u64 {
    let e = g.num_edges();
    let a = g.incidence();
    let top = *boundary.iter().max().unwrap();
    let mut x = vec![1u64; e];
    let mut count = 0;
    loop {
        if a.iter().zip(boundary).all(|(row, &l)| row.iter().zip(&x).map(|(&c, &v)| c as u64 * v).sum::<u64>() == l) {
            count += 1;
        }
        let mut i = 0;
        while i < e {
            x[i] += 1;
            if x[i] <= top {
                break;
            }
            x[i] = 1;
            i += 1;
        }
        if i == e {
            return count;
        }
    }
}

#[test]
fn power_zero_counts_metrics() {
    for l in (4..=20u64).step_by(2) {
        // Theta graph: three edges summing to L/2; quadrivalent graph: two.
        let h = l / 2;
        let expected = ratio(((h - 1) * (h - 2) / 2) as i64, 6) + ratio(h as i64 - 1, 4);
        assert_eq!(exact(&lattice_sum(1, 1, &[int(l as i64)], 0.0).unwrap().value), expected);
    }
    let boundary = [6u64, 8];
    let graphs = enumerate_reduced(1, 2).unwrap();
    let mut expected = BigRational::zero();
    for g in &graphs {
        let listed = enumerate_integer_metrics(g, &boundary);
        assert_eq!(listed.len() as u64, count_metrics(g, &boundary));
        expected += ratio(listed.len() as i64, automorphism_group(g).order as i64);
    }
    let got = lattice_sum(1, 2, &[int(6), int(8)], 0.0).unwrap();
    assert_eq!(exact(&got.value), expected);
}

#[test]
fn float_path_tracks_the_exact_sum() {
    let b = [int(8), int(10)];
    let ex = exact(&lattice_sum(1, 2, &b, 2.0).unwrap().value);
    let fl = lattice_sum_with(1, 2, &b, 2.0, LatticeOptions { precision: Precision::Float, ..Default::default() })
        .unwrap()
        .value;
    let LatticeValue::Float { value, error } = fl else { panic!("expected a float value") };
    let target = ribbonvol::scalar::ratio_to_f64(&ex);
    assert!((value - target).abs() <= error.max(1e-15 * target), "{value} vs {target} (bound {error})");
}
