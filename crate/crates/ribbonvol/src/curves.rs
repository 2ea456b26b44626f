//! Simple loops, dumbbells and the cones they span in edge-intersection space.
//!
//! A multicurve is recorded by how many times it crosses each edge. Admissible
//! vectors satisfy a triangle inequality at every corner, and the integral
//! ones form the lattice of vectors whose incident sum at each vertex is even.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::ribbon::RibbonGraph;
use crate::scalar::int;
use crate::triangulate::pulling_triangulation;

/// Angle between dart `dart` and its successor at a trivalent vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Corner {
    pub dart: usize,
    pub vertex: usize,
    /// Edge facing the corner; its length is subtracted in the slack.
    pub opposite: usize,
    /// The two edges bounding the corner.
    pub sides: [usize; 2],
    /// Face (zero-based) the corner belongs to.
    pub face: usize,
}

impl Corner {
    /// `x[sides[0]] + x[sides[1]] - x[opposite]`.
    pub fn slack(&self, x: &[i64]) -> i64 {
        x[self.sides[0]] + x[self.sides[1]] - x[self.opposite]
    }

    /// The slack as a coefficient vector.
    pub fn functional(&self, edges: usize) -> Vec<i64> {
        let mut h = vec![0; edges];
        h[self.sides[0]] += 1;
        h[self.sides[1]] += 1;
        h[self.opposite] -= 1;
        h
    }
}

/// Corners of a trivalent graph, indexed by their first dart.
pub fn corners(g: &RibbonGraph) -> Result<Vec<Corner>> {
    if !g.is_trivalent() {
        return Err(Error::NotTrivalent);
    }
    Ok((0..g.num_darts())
        .map(|d| {
            let next = g.sigma()[d];
            Corner {
                dart: d,
                vertex: g.vertex_of(d),
                opposite: g.edge_of(g.sigma()[next]),
                sides: [g.edge_of(d), g.edge_of(next)],
                face: g.face_of(d),
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum CurveKind {
    SimpleLoop,
    Dumbbell,
    Boundary,
}

/// Edge-crossing vector of a closed curve carried by the graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CurveVector {
    pub vector: Vec<i64>,
    pub kind: CurveKind,
    /// Closed dart path realising the vector; dart `d` runs from its own
    /// vertex to the vertex of its partner.
    pub witness: Vec<usize>,
}

impl CurveVector {
    /// `<lengths, vector>`.
    pub fn length<T: crate::Scalar>(&self, lengths: &[T]) -> T {
        self.vector
            .iter()
            .zip(lengths)
            .filter(|(c, _)| **c != 0)
            .fold(T::zero(), |acc, (&c, l)| acc + T::from_int(c) * l.clone())
    }
}

#[derive(Clone, Debug)]
struct Cycle {
    darts: Vec<usize>,
    edges: u64,
    vertices: u64,
}

fn simple_cycles(g: &RibbonGraph) -> Vec<Cycle> {
    let mut found: BTreeMap<u64, Cycle> = BTreeMap::new();
    for start in 0..g.num_vertices() {
        let mut path = Vec::new();
        extend_cycle(g, start, start, 1 << start, 0, &mut path, &mut found);
    }
    found.into_values().collect()
}

fn extend_cycle(
    g: &RibbonGraph,
    start: usize,
    at: usize,
    visited: u64,
    used: u64,
    path: &mut Vec<usize>,
    found: &mut BTreeMap<u64, Cycle>,
) {
    for &d in g.vertex_darts(at) {
        let e = g.edge_of(d);
        if used >> e & 1 == 1 {
            continue;
        }
        let next = g.vertex_of(g.iota()[d]);
        if next == start {
            let edges = used | 1 << e;
            path.push(d);
            found.entry(edges).or_insert_with(|| Cycle { darts: path.clone(), edges, vertices: visited });
            path.pop();
        } else if next > start && visited >> next & 1 == 0 {
            path.push(d);
            extend_cycle(g, start, next, visited | 1 << next, used | 1 << e, path, found);
            path.pop();
        }
    }
}

fn paths_between(g: &RibbonGraph, from: &Cycle, to: &Cycle) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for v in 0..g.num_vertices() {
        if from.vertices >> v & 1 == 0 {
            continue;
        }
        for &d in g.vertex_darts(v) {
            if from.edges >> g.edge_of(d) & 1 == 1 {
                continue;
            }
            let mut path = vec![d];
            walk_path(g, d, from.vertices | 1 << v, to, &mut path, &mut out);
        }
    }
    out
}

fn walk_path(g: &RibbonGraph, last: usize, blocked: u64, to: &Cycle, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let arrive = g.iota()[last];
    let w = g.vertex_of(arrive);
    if to.vertices >> w & 1 == 1 {
        out.push(path.clone());
        return;
    }
    if blocked >> w & 1 == 1 {
        return;
    }
    for &d in g.vertex_darts(w) {
        if d == arrive {
            continue;
        }
        path.push(d);
        walk_path(g, d, blocked | 1 << w, to, path, out);
        path.pop();
    }
}

fn rotate_to(g: &RibbonGraph, cycle: &[usize], vertex: usize) -> Vec<usize> {
    let k = cycle.iter().position(|&d| g.vertex_of(d) == vertex).expect("vertex lies on cycle");
    cycle[k..].iter().chain(&cycle[..k]).copied().collect()
}

fn edge_vector(g: &RibbonGraph, darts: &[usize]) -> Vec<i64> {
    let mut v = vec![0; g.num_edges()];
    for &d in darts {
        v[g.edge_of(d)] += 1;
    }
    v
}

/// Every simple loop and dumbbell, deduplicated by vector; vectors equal to a
/// face vector are tagged [`CurveKind::Boundary`]. Sorted by vector.
pub fn loops_and_dumbbells(g: &RibbonGraph) -> Result<Vec<CurveVector>> {
    if !g.is_trivalent() {
        return Err(Error::NotTrivalent);
    }
    if g.num_edges() > 64 || g.num_vertices() > 64 {
        return Err(Error::TooLarge("more than 64 edges".into()));
    }
    let faces: BTreeSet<Vec<i64>> = (0..g.num_faces()).map(|i| g.face_vector(i)).collect();
    let cycles = simple_cycles(g);
    let mut out: BTreeMap<Vec<i64>, CurveVector> = BTreeMap::new();
    let mut add = |vector: Vec<i64>, kind: CurveKind, witness: Vec<usize>| {
        let kind = if faces.contains(&vector) { CurveKind::Boundary } else { kind };
        out.entry(vector.clone()).or_insert(CurveVector { vector, kind, witness });
    };
    for c in &cycles {
        add(edge_vector(g, &c.darts), CurveKind::SimpleLoop, c.darts.clone());
    }
    for (i, a) in cycles.iter().enumerate() {
        for b in &cycles[i + 1..] {
            if a.vertices & b.vertices != 0 {
                continue;
            }
            for path in paths_between(g, a, b) {
                let u = g.vertex_of(path[0]);
                let w = g.vertex_of(g.iota()[*path.last().unwrap()]);
                let mut witness = rotate_to(g, &a.darts, u);
                witness.extend(&path);
                witness.extend(rotate_to(g, &b.darts, w));
                witness.extend(path.iter().rev().map(|&d| g.iota()[d]));
                add(edge_vector(g, &witness), CurveKind::Dumbbell, witness);
            }
        }
    }
    Ok(out.into_values().collect())
}

/// Essential simple loops and dumbbells (no face vectors), sorted by vector.
pub fn essential_loops_and_dumbbells(g: &RibbonGraph) -> Result<Vec<CurveVector>> {
    Ok(loops_and_dumbbells(g)?.into_iter().filter(|c| c.kind != CurveKind::Boundary).collect())
}

/// Whether `x` satisfies every corner inequality and is non-negative.
pub fn in_admissible_cone(cs: &[Corner], x: &[i64]) -> bool {
    x.iter().all(|&v| v >= 0) && cs.iter().all(|c| c.slack(x) >= 0)
}

/// Whether `x` lies in the union of the corner-vanishing cones: admissible and
/// every face has a corner with zero slack.
pub fn in_curve_complex(g: &RibbonGraph, cs: &[Corner], x: &[i64]) -> bool {
    if !in_admissible_cone(cs, x) {
        return false;
    }
    let mut hit = vec![false; g.num_faces()];
    for c in cs {
        if c.slack(x) == 0 {
            hit[c.face] = true;
        }
    }
    hit.iter().all(|&h| h)
}

/// Whether every vertex has an even incident sum.
pub fn in_multicurve_lattice(g: &RibbonGraph, x: &[i64]) -> bool {
    (0..g.num_vertices()).all(|v| g.vertex_darts(v).iter().map(|&d| x[g.edge_of(d)]).sum::<i64>() % 2 == 0)
}

/// Inequalities cutting out the admissible cone: coordinates, then corner slacks.
pub fn admissible_inequalities(g: &RibbonGraph, cs: &[Corner]) -> Vec<Vec<i64>> {
    let e = g.num_edges();
    let mut h: Vec<Vec<i64>> = (0..e)
        .map(|i| {
            let mut r = vec![0; e];
            r[i] = 1;
            r
        })
        .collect();
    h.extend(cs.iter().map(|c| c.functional(e)));
    h
}

/// Whether `x` spans an extremal ray of the cone `{h . y >= 0} ∩ {q . y = 0}`
/// of dimension `dim`: the constraints tight at `x` have rank `dim - 1` inside
/// the cone's span.
pub fn is_extremal(x: &[i64], inequalities: &[Vec<i64>], equalities: &[Vec<i64>], ambient: usize) -> bool {
    let tight: Vec<Vec<BigRational>> = inequalities
        .iter()
        .filter(|h| h.iter().zip(x).map(|(a, b)| a * b).sum::<i64>() == 0)
        .chain(equalities.iter())
        .map(|h| h.iter().map(|&v| int(v)).collect())
        .collect();
    linalg::rank(&tight) + 1 == ambient
}

/// Simplicial cone of a triangulation.
#[derive(Clone, Debug, Serialize)]
pub struct Simplex {
    /// Indices into [`ConeDecomposition::curves`].
    pub rays: Vec<usize>,
    pub det: u64,
}

/// Full-dimensional cone cut out by one vanishing corner per face.
#[derive(Clone, Debug, Serialize)]
pub struct Cone {
    /// Corner dart chosen for each face.
    pub delta: Vec<usize>,
    /// Indices into [`ConeDecomposition::curves`], lexicographic by vector.
    pub rays: Vec<usize>,
    pub simplices: Vec<Simplex>,
}

/// Triangulated union of the corner-vanishing cones of a trivalent graph.
#[derive(Clone, Debug, Serialize)]
pub struct ConeDecomposition {
    /// `6g - 6 + 2n`.
    pub dim: usize,
    pub curves: Vec<CurveVector>,
    pub cones: Vec<Cone>,
    /// Corner choices whose cone repeated an earlier one.
    pub duplicate_deltas: usize,
    /// Corner choices whose cone was lower-dimensional.
    pub degenerate_deltas: usize,
}

/// Order in which generators are pulled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RayOrder {
    #[default]
    Lexicographic,
    ReverseLexicographic,
}

fn order_indices(curves: &[CurveVector], idx: &mut [usize], order: RayOrder) {
    idx.sort_by(|&a, &b| curves[a].vector.cmp(&curves[b].vector));
    if order == RayOrder::ReverseLexicographic {
        idx.reverse();
    }
}

/// Cone decomposition with the default ray order.
pub fn cone_decomposition(g: &RibbonGraph) -> Result<ConeDecomposition> {
    cone_decomposition_with(g, RayOrder::Lexicographic)
}

/// Cone decomposition pulling rays in the given order.
pub fn cone_decomposition_with(g: &RibbonGraph, order: RayOrder) -> Result<ConeDecomposition> {
    let cs = corners(g)?;
    let (genus, n) = g.graph_type();
    let dim = 6 * genus + 2 * n - 6;
    let curves = essential_loops_and_dumbbells(g)?;
    if dim == 0 {
        let cone = Cone { delta: Vec::new(), rays: Vec::new(), simplices: vec![Simplex { rays: Vec::new(), det: 1 }] };
        return Ok(ConeDecomposition { dim, curves, cones: vec![cone], duplicate_deltas: 0, degenerate_deltas: 0 });
    }
    let by_face: Vec<Vec<&Corner>> =
        (0..g.num_faces()).map(|f| cs.iter().filter(|c| c.face == f).collect()).collect();
    let inequalities = admissible_inequalities(g, &cs);
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut cones = Vec::new();
    let (mut duplicates, mut degenerate) = (0, 0);
    let mut choice = vec![0usize; n];
    loop {
        let delta: Vec<&Corner> = (0..n).map(|f| by_face[f][choice[f]]).collect();
        let mut rays: Vec<usize> = (0..curves.len())
            .filter(|&i| delta.iter().all(|c| c.slack(&curves[i].vector) == 0))
            .collect();
        let rows: Vec<Vec<BigRational>> =
            rays.iter().map(|&i| curves[i].vector.iter().map(|&v| int(v)).collect()).collect();
        if linalg::rank(&rows) < dim {
            degenerate += 1;
        } else if !seen.insert(rays.clone()) {
            duplicates += 1;
        } else {
            order_indices(&curves, &mut rays, order);
            let gens: Vec<Vec<i64>> = rays.iter().map(|&i| curves[i].vector.clone()).collect();
            let mut simplices = Vec::new();
            for local in pulling_triangulation(&gens, &inequalities) {
                let members: Vec<usize> = local.iter().map(|&k| rays[k]).collect();
                let vecs: Vec<Vec<i64>> = members.iter().map(|&i| curves[i].vector.clone()).collect();
                let det = det_simplex(g, &vecs)?;
                simplices.push(Simplex { rays: members, det });
            }
            rays.sort_unstable();
            cones.push(Cone { delta: delta.iter().map(|c| c.dart).collect(), rays, simplices });
        }
        let mut f = 0;
        while f < n {
            choice[f] += 1;
            if choice[f] < by_face[f].len() {
                break;
            }
            choice[f] = 0;
            f += 1;
        }
        if f == n {
            break;
        }
    }
    if cones.is_empty() {
        return Err(Error::NoFullCone);
    }
    Ok(ConeDecomposition { dim, curves, cones, duplicate_deltas: duplicates, degenerate_deltas: degenerate })
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Integer basis of the saturation `Z^E ∩ span(rows)` together with the index
/// of the lattice spanned by `rows` inside it.
pub fn saturation(rows: &[Vec<i64>]) -> Result<(Vec<Vec<i64>>, u128)> {
    let k = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let mut inv: Vec<Vec<i128>> = (0..m).map(|i| (0..m).map(|j| i128::from(i == j)).collect()).collect();
    for i in 0..k {
        let pivot = (i..m).find(|&j| a[i][j] != 0).ok_or(Error::DependentRays)?;
        if pivot != i {
            for row in a.iter_mut() {
                row.swap(i, pivot);
            }
            inv.swap(i, pivot);
        }
        for j in i + 1..m {
            if a[i][j] == 0 {
                continue;
            }
            let (x0, y0) = (a[i][i], a[i][j]);
            let (g, x, y) = ext_gcd(x0, y0);
            let (p, q) = (x0 / g, y0 / g);
            for row in a.iter_mut() {
                let (ci, cj) = (row[i], row[j]);
                row[i] = x * ci + y * cj;
                row[j] = -q * ci + p * cj;
            }
            let (ri, rj) = (inv[i].clone(), inv[j].clone());
            for c in 0..m {
                inv[i][c] = p * ri[c] + q * rj[c];
                inv[j][c] = -y * ri[c] + x * rj[c];
            }
        }
    }
    let index = (0..k).map(|i| a[i][i].unsigned_abs()).product();
    let basis = inv[..k].iter().map(|r| r.iter().map(|&v| v as i64).collect()).collect();
    Ok((basis, index))
}

fn gf2_rank(mut rows: Vec<u64>) -> usize {
    let mut rank = 0;
    for bit in 0..64 {
        if let Some(p) = (rank..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) {
            rows.swap(rank, p);
            for r in 0..rows.len() {
                if r != rank && rows[r] >> bit & 1 == 1 {
                    rows[r] ^= rows[rank];
                }
            }
            rank += 1;
        }
    }
    rank
}

/// Parity of the vertex sums of `x`, one bit per vertex.
fn parity_bits(g: &RibbonGraph, x: &[i64]) -> u64 {
    let mut bits = 0;
    for v in 0..g.num_vertices() {
        let s: i64 = g.vertex_darts(v).iter().map(|&d| x[g.edge_of(d)]).sum();
        bits |= (s.rem_euclid(2) as u64) << v;
    }
    bits
}

/// Index of the even-vertex-sum lattice inside the saturated lattice of the
/// span of `basis`: `2^(rank of the parity map)`.
fn parity_index(g: &RibbonGraph, basis: &[Vec<i64>]) -> u128 {
    1u128 << gf2_rank(basis.iter().map(|b| parity_bits(g, b)).collect())
}

/// Number of points of the multicurve lattice in the half-open parallelepiped
/// spanned by `rays` (which must lie in the lattice).
pub fn det_simplex(g: &RibbonGraph, rays: &[Vec<i64>]) -> Result<u64> {
    if rays.is_empty() {
        return Ok(1);
    }
    if rays.iter().any(|r| !in_multicurve_lattice(g, r)) {
        return Err(Error::Invalid("ray outside the multicurve lattice".into()));
    }
    let (basis, index) = saturation(rays)?;
    let parity = parity_index(g, &basis);
    debug_assert_eq!(index % parity, 0);
    Ok((index / parity) as u64)
}

/// Covolume of the multicurve lattice in `Z^E`.
pub fn lattice_covolume(g: &RibbonGraph) -> u64 {
    let e = g.num_edges();
    let basis: Vec<Vec<i64>> = (0..e).map(|i| (0..e).map(|j| i64::from(i == j)).collect()).collect();
    parity_index(g, &basis) as u64
}

/// Number of integral multicurves of length at most `radius` in the union of
/// corner-vanishing cones, the empty multicurve included.
pub fn count_multicurves(g: &RibbonGraph, lengths: &[BigRational], radius: &BigRational) -> Result<u64> {
    if !radius.is_positive() {
        return Err(Error::NonPositiveRadius);
    }
    if lengths.len() != g.num_edges() {
        return Err(Error::LengthMismatch { expected: g.num_edges(), got: lengths.len() });
    }
    if lengths.iter().any(|l| !l.is_positive()) {
        return Err(Error::NonPositiveLength);
    }
    let cs = corners(g)?;
    let den = lengths.iter().chain([radius]).fold(num_bigint::BigInt::from(1), |acc, q| {
        num_integer::Integer::lcm(&acc, q.denom())
    });
    let to_int = |q: &BigRational| -> Result<i64> {
        (q * BigRational::from_integer(den.clone()))
            .floor()
            .to_integer()
            .to_i64()
            .ok_or_else(|| Error::TooLarge("lengths overflow 64-bit integers".into()))
    };
    let weights: Vec<i64> = lengths.iter().map(to_int).collect::<Result<_>>()?;
    let budget = to_int(radius)?;
    let mut x = vec![0i64; g.num_edges()];
    let mut count = 0u64;
    let mut scan = Scan { g, cs: &cs, weights: &weights, x: &mut x, count: &mut count };
    scan.go(0, budget);
    Ok(count)
}

struct Scan<'a> {
    g: &'a RibbonGraph,
    cs: &'a [Corner],
    weights: &'a [i64],
    x: &'a mut Vec<i64>,
    count: &'a mut u64,
}

impl Scan<'_> {
    fn go(&mut self, e: usize, budget: i64) {
        if e == self.x.len() {
            if in_multicurve_lattice(self.g, self.x) && in_curve_complex(self.g, self.cs, self.x) {
                *self.count += 1;
            }
            return;
        }
        let w = self.weights[e];
        let mut v = 0;
        while v * w <= budget {
            self.x[e] = v;
            self.go(e + 1, budget - v * w);
            v += 1;
        }
        self.x[e] = 0;
    }
}

/// Whether a lattice point lies in the closed simplicial cone spanned by `rays`.
pub fn in_simplicial_cone(rays: &[Vec<i64>], x: &[i64]) -> bool {
    let basis: Vec<Vec<BigRational>> = rays.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect();
    let target: Vec<BigRational> = x.iter().map(|&v| int(v)).collect();
    linalg::coordinates(&basis, &target).is_some_and(|c| c.iter().all(|v| !v.is_negative()))
}

/// Whether a point lies in the open simplicial cone spanned by `rays`.
pub fn in_open_simplicial_cone(rays: &[Vec<i64>], x: &[i64]) -> bool {
    let basis: Vec<Vec<BigRational>> = rays.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect();
    let target: Vec<BigRational> = x.iter().map(|&v| int(v)).collect();
    linalg::coordinates(&basis, &target).is_some_and(|c| c.iter().all(|v| v.is_positive()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ribbon::catalog;

    #[test]
    fn theta_corners_and_slack() {
        let t = catalog::theta();
        let cs = corners(&t).unwrap();
        assert_eq!(cs.len(), 6);
        assert!(cs.iter().all(|c| c.face == 0));
        let c = cs.iter().find(|c| c.opposite == 2).unwrap();
        assert_eq!(c.slack(&[1, 1, 0]), 2);
        let c = cs.iter().find(|c| c.opposite == 1).unwrap();
        assert_eq!(c.slack(&[1, 1, 0]), 0);
    }

    #[test]
    fn theta_curves_and_cones() {
        let t = catalog::theta();
        let curves = essential_loops_and_dumbbells(&t).unwrap();
        let vecs: Vec<Vec<i64>> = curves.iter().map(|c| c.vector.clone()).collect();
        assert_eq!(vecs, vec![vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]);
        let dec = cone_decomposition(&t).unwrap();
        assert_eq!(dec.cones.len(), 3);
        for cone in &dec.cones {
            assert_eq!(cone.simplices.len(), 1);
            assert_eq!(cone.simplices[0].det, 1);
        }
    }

    #[test]
    fn determinants() {
        let t = catalog::theta();
        assert_eq!(det_simplex(&t, &[vec![1, 1, 0], vec![1, 0, 1]]).unwrap(), 1);
        assert_eq!(det_simplex(&t, &[vec![2, 2, 0], vec![1, 0, 1]]).unwrap(), 2);
        assert!(det_simplex(&t, &[vec![1, 1, 0], vec![2, 2, 0]]).is_err());
        assert_eq!(lattice_covolume(&t), 2);
    }

    #[test]
    fn parity_rejects_odd_points() {
        let t = catalog::theta();
        let cs = corners(&t).unwrap();
        assert!(in_admissible_cone(&cs, &[1, 1, 1]));
        assert!(!in_multicurve_lattice(&t, &[1, 1, 1]));
    }

    #[test]
    fn small_counts() {
        let t = catalog::theta();
        let ones = vec![int(1); 3];
        assert_eq!(count_multicurves(&t, &ones, &int(2)).unwrap(), 4);
        assert_eq!(count_multicurves(&t, &ones, &crate::scalar::ratio(3, 2)).unwrap(), 1);
        assert!(count_multicurves(&t, &ones, &int(0)).is_err());
    }
}
