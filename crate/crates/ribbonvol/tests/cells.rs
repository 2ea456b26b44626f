//! Cell vertices, charts and covers at fixed boundary lengths.

mod common;

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand_distr::{Distribution, Gamma};
use ribbonvol::cells::{
    cell_vertices, cover_epsilon_for, default_lengths, density, is_nonresonant, is_support_set, support_matrix,
    support_sets, tangent_rays, ThetaMap,
};
use ribbonvol::linalg;
use ribbonvol::ribbon::{catalog, enumerate_trivalent, RibbonGraph};
use ribbonvol::scalar::{int, ratio, ratio_to_f64};

use common::{rng, SMALL_TYPES};

fn subsets(e: usize, k: usize) -> Vec<Vec<usize>> {
    (0u64..1 << e)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..e).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Basic feasible solutions of `{l >= 0, A l = L}`.
fn basic_feasible(g: &RibbonGraph, boundary: &[BigRational]) -> BTreeSet<Vec<BigRational>> {
    let a = g.incidence();
    let mut out = BTreeSet::new();
    for cols in subsets(g.num_edges(), g.num_faces()) {
        let m: Vec<Vec<BigRational>> = a.iter().map(|row| cols.iter().map(|&e| int(row[e])).collect()).collect();
        let Some(sol) = linalg::solve(&m, boundary) else { continue };
        if sol.iter().all(|v| !v.is_negative()) {
            let mut full = vec![BigRational::zero(); g.num_edges()];
            for (&e, v) in cols.iter().zip(sol) {
                full[e] = v;
            }
            out.insert(full);
        }
    }
    out
}

fn boundaries(n: usize) -> Vec<Vec<BigRational>> {
    let mut out = vec![default_lengths(n, &int(12))];
    let odd: Vec<BigRational> = (0..n).map(|i| ratio(7 + 5 * i as i64 * i as i64, 3)).collect();
    out.push(odd);
    out.retain(|l| is_nonresonant(l));
    out
}

#[test]
fn vertices_are_the_basic_feasible_solutions() {
    for (genus, n) in SMALL_TYPES.into_iter().chain([(0, 5), (2, 1)]) {
        for l in boundaries(n) {
            for g in enumerate_trivalent(genus, n).unwrap() {
                let ours: BTreeSet<Vec<BigRational>> =
                    cell_vertices(&g, &l).unwrap().into_iter().map(|v| v.lambda).collect();
                assert_eq!(ours, basic_feasible(&g, &l), "({genus},{n}) at {l:?}");
            }
        }
    }
}

#[test]
fn five_support_sets_on_the_looped_chain() {
    let g = catalog::looped_chain();
    let expected = vec![vec![0, 1, 2, 5], vec![0, 1, 3, 5], vec![0, 1, 4, 5], vec![0, 2, 4, 5], vec![0, 3, 4, 5]];
    assert_eq!(support_sets(&g), expected);
    let brute: Vec<Vec<usize>> =
        subsets(g.num_edges(), g.num_faces()).into_iter().filter(|s| is_support_set(&g, s)).collect();
    assert_eq!(brute.len(), 5);
}

#[test]
fn support_sets_are_exactly_the_invertible_column_sets() {
    // A square incidence submatrix is invertible iff every face is met and
    // each dual component has one odd cycle.
    for (genus, n) in SMALL_TYPES.into_iter().chain([(0, 5)]) {
        for g in enumerate_trivalent(genus, n).unwrap() {
            for s in subsets(g.num_edges(), n) {
                let m: Vec<Vec<BigRational>> =
                    support_matrix(&g, &s).into_iter().map(|r| r.into_iter().map(int).collect()).collect();
                assert_eq!(!linalg::determinant(&m).is_zero(), is_support_set(&g, &s), "{s:?}");
            }
        }
    }
}

#[test]
fn determinants_and_densities() {
    for (genus, n) in SMALL_TYPES {
        for g in enumerate_trivalent(genus, n).unwrap() {
            for s in support_sets(&g) {
                let m: Vec<Vec<BigRational>> =
                    support_matrix(&g, &s).into_iter().map(|r| r.into_iter().map(int).collect()).collect();
                let det = linalg::determinant(&m).abs();
                // Components of the dual subgraph: faces joined by support edges.
                let mut root: Vec<usize> = (0..n).collect();
                fn find(r: &mut Vec<usize>, x: usize) -> usize {
                    if r[x] != x {
                        let top = find(r, r[x]);
                        r[x] = top;
                    }
                    r[x]
                }
                for &e in &s {
                    let [a, b] = g.edge_darts(e).map(|d| g.face_of(d));
                    let (a, b) = (find(&mut root, a), find(&mut root, b));
                    root[a] = b;
                }
                let comps = (0..n).filter(|&i| find(&mut root, i) == i).count();
                assert_eq!(det, BigRational::from_integer(BigInt::from(2).pow(comps as u32)));
                let expected = BigRational::from_integer(BigInt::from(2).pow((2 * genus + n - 2) as u32)) / det;
                assert_eq!(density(&g, &s).unwrap(), expected);
            }
        }
    }
}

#[test]
fn tangent_rays_are_dual_to_the_vanishing_edges() {
    for (genus, n) in SMALL_TYPES {
        for l in boundaries(n) {
            for g in enumerate_trivalent(genus, n).unwrap() {
                let a = g.incidence();
                for v in cell_vertices(&g, &l).unwrap() {
                    let rays = tangent_rays(&g, &v).unwrap();
                    for (k, ray) in rays.iter().enumerate() {
                        for (j, &e) in v.vanishing.iter().enumerate() {
                            assert_eq!(ray[e], int(i64::from(j == k)));
                        }
                        for row in &a {
                            let image: BigRational = row.iter().zip(ray).map(|(&c, x)| x * int(c)).sum();
                            assert!(image.is_zero());
                        }
                    }
                    let map: ThetaMap<BigRational> = ThetaMap::new(&g, &v).unwrap();
                    let x: Vec<BigRational> = (0..v.vanishing.len()).map(|i| ratio(i as i64 + 1, 7)).collect();
                    assert_eq!(map.chart(&map.apply(&x)), x);
                }
            }
        }
    }
}

#[test]
fn covers_contain_every_sampled_point() {
    let mut r = rng(21);
    let gamma = Gamma::new(1.0, 1.0).unwrap();
    for (genus, n) in SMALL_TYPES {
        let graphs = enumerate_trivalent(genus, n).unwrap();
        for l in boundaries(n) {
            let cover = cover_epsilon_for(&graphs, &l).unwrap();
            for g in &graphs {
                let verts = cell_vertices(g, &l).unwrap();
                if verts.is_empty() {
                    continue;
                }
                let lambdas: Vec<Vec<f64>> = verts.iter().map(|v| v.lambda.iter().map(ratio_to_f64).collect()).collect();
                for _ in 0..10_000 {
                    let w: Vec<f64> = (0..verts.len()).map(|_| gamma.sample(&mut r)).collect();
                    let total: f64 = w.iter().sum();
                    let point: Vec<f64> = (0..g.num_edges())
                        .map(|e| lambdas.iter().zip(&w).map(|(lam, wi)| lam[e] * wi / total).sum())
                        .collect();
                    assert!(verts.iter().any(|v| cover.contains(v, &point)), "{point:?} uncovered");
                }
            }
        }
    }
}
