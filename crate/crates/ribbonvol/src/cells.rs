//! Cell geometry at fixed boundary lengths.
//!
//! The cell of a trivalent graph `G` is the open polytope
//! `{l > 0 : sum_e a_{i,e} l_e = L_i}`. Its closure has one vertex per support
//! set whose linear system has a positive solution.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::ribbon::{enumerate_trivalent, RibbonGraph};
use crate::scalar::{format_rational, int, ratio, Scalar};
use crate::triangulate::pulling_triangulation;

/// True iff no signed sub-sum `sum eps_i L_i` with `eps` in `{-1,0,1}^n`,
/// `eps != 0`, vanishes.
pub fn is_nonresonant<T: Scalar>(lengths: &[T]) -> bool {
    let n = lengths.len();
    let mut eps = vec![0i8; n];
    loop {
        let mut k = 0;
        while k < n {
            eps[k] += 1;
            if eps[k] > 1 {
                eps[k] = -1;
                k += 1;
            } else {
                break;
            }
        }
        if k == n {
            return true;
        }
        if eps.iter().all(|&e| e == 0) {
            continue;
        }
        let sum = eps.iter().zip(lengths).fold(T::zero(), |acc, (&e, l)| match e {
            1 => acc + l.clone(),
            -1 => acc - l.clone(),
            _ => acc,
        });
        if sum.is_zero() {
            return false;
        }
    }
}

/// Default non-resonant boundary lengths: geometric ratios `(3/2)^i` scaled to
/// total `perimeter`.
pub fn default_lengths(n: usize, perimeter: &BigRational) -> Vec<BigRational> {
    let mut raw = Vec::with_capacity(n);
    let mut cur = BigRational::one();
    for _ in 0..n {
        raw.push(cur.clone());
        cur = cur * ratio(3, 2);
    }
    let total: BigRational = raw.iter().sum();
    raw.into_iter().map(|x| x * perimeter / &total).collect()
}

/// Faces on the two sides of each edge.
fn edge_faces(g: &RibbonGraph) -> Vec<[usize; 2]> {
    (0..g.num_edges())
        .map(|e| {
            let [d, d2] = g.edge_darts(e);
            [g.face_of(d), g.face_of(d2)]
        })
        .collect()
}

/// Support-set predicate on an edge subset of size `n`.
pub fn is_support_set(g: &RibbonGraph, subset: &[usize]) -> bool {
    let n = g.num_faces();
    if subset.len() != n {
        return false;
    }
    let sides = edge_faces(g);
    let mut touched = vec![false; n];
    for &e in subset {
        touched[sides[e][0]] = true;
        touched[sides[e][1]] = true;
    }
    if touched.iter().any(|t| !t) {
        return false;
    }
    dual_components(n, subset.iter().map(|&e| sides[e])).iter().all(|c| c.edges == c.vertices && !c.bipartite)
}

struct DualComponent {
    vertices: usize,
    edges: usize,
    bipartite: bool,
}

fn dual_components(n: usize, edges: impl Iterator<Item = [usize; 2]>) -> Vec<DualComponent> {
    let mut adj = vec![Vec::new(); n];
    for [a, b] in edges {
        adj[a].push(b);
        if a != b {
            adj[b].push(a);
        }
    }
    let mut colour: Vec<Option<bool>> = vec![None; n];
    let mut out = Vec::new();
    for start in 0..n {
        if colour[start].is_some() {
            continue;
        }
        colour[start] = Some(false);
        let mut stack = vec![start];
        let (mut vertices, mut degree, mut bipartite) = (0, 0, true);
        while let Some(v) = stack.pop() {
            vertices += 1;
            let cv = colour[v].unwrap();
            for &w in &adj[v] {
                degree += if w == v { 2 } else { 1 };
                match colour[w] {
                    None => {
                        colour[w] = Some(!cv);
                        stack.push(w);
                    }
                    Some(cw) if cw == cv => bipartite = false,
                    _ => {}
                }
            }
        }
        out.push(DualComponent { vertices, edges: degree / 2, bipartite });
    }
    out
}

/// All support sets, as sorted edge lists in lexicographic order.
pub fn support_sets(g: &RibbonGraph) -> Vec<Vec<usize>> {
    let (e, n) = (g.num_edges(), g.num_faces());
    let mut out = Vec::new();
    let mut subset = Vec::with_capacity(n);
    fn rec(g: &RibbonGraph, e: usize, n: usize, next: usize, subset: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if subset.len() == n {
            if is_support_set(g, subset) {
                out.push(subset.clone());
            }
            return;
        }
        for k in next..e {
            if e - k < n - subset.len() {
                break;
            }
            subset.push(k);
            rec(g, e, n, k + 1, subset, out);
            subset.pop();
        }
    }
    rec(g, e, n, 0, &mut subset, &mut out);
    out
}

/// `n x n` incidence submatrix on the columns `subset`.
pub fn support_matrix(g: &RibbonGraph, subset: &[usize]) -> Vec<Vec<i64>> {
    g.incidence().iter().map(|row| subset.iter().map(|&e| row[e]).collect()).collect()
}

/// A vertex of the closure of a cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellVertex {
    pub lambda: Vec<BigRational>,
    pub support: Vec<usize>,
    pub vanishing: Vec<usize>,
    /// Density of the Kontsevich measure with respect to Lebesgue measure in
    /// the coordinates `l_e`, `e` in `vanishing`.
    pub density: BigRational,
}

impl Serialize for CellVertex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("CellVertex", 4)?;
        st.serialize_field("lambda", &self.lambda.iter().map(format_rational).collect::<Vec<_>>())?;
        st.serialize_field("support", &self.support)?;
        st.serialize_field("vanishing", &self.vanishing)?;
        st.serialize_field("density", &format_rational(&self.density))?;
        st.end()
    }
}

fn check_boundary(g: &RibbonGraph, lengths: &[BigRational]) -> Result<()> {
    if lengths.len() != g.num_faces() {
        return Err(Error::LengthMismatch { expected: g.num_faces(), got: lengths.len() });
    }
    if lengths.iter().any(|l| !l.is_positive()) {
        return Err(Error::NonPositiveLength);
    }
    if !is_nonresonant(lengths) {
        return Err(Error::Resonant);
    }
    Ok(())
}

/// Solves the support system for `subset`; `None` if singular.
pub fn solve_support(g: &RibbonGraph, subset: &[usize], boundary: &[BigRational]) -> Option<Vec<BigRational>> {
    let m: Vec<Vec<BigRational>> =
        support_matrix(g, subset).into_iter().map(|r| r.into_iter().map(int).collect()).collect();
    let sol = linalg::solve(&m, boundary)?;
    let mut full = vec![BigRational::zero(); g.num_edges()];
    for (&e, v) in subset.iter().zip(sol) {
        full[e] = v;
    }
    Some(full)
}

/// `2^{2g-2+n} / |det M_S|`.
pub fn density(g: &RibbonGraph, subset: &[usize]) -> Result<BigRational> {
    let m: Vec<Vec<BigRational>> =
        support_matrix(g, subset).into_iter().map(|r| r.into_iter().map(int).collect()).collect();
    let det = linalg::determinant(&m).abs();
    if det.is_zero() {
        return Err(Error::InvalidGraph(format!("singular support matrix on {subset:?}")));
    }
    let (genus, n) = g.graph_type();
    let pow = BigRational::from_integer(BigInt::from(2).pow((2 * genus + n - 2) as u32));
    Ok(pow / det)
}

/// Vertices of the closed cell at non-resonant boundary lengths.
pub fn cell_vertices(g: &RibbonGraph, boundary: &[BigRational]) -> Result<Vec<CellVertex>> {
    if !g.is_trivalent() {
        return Err(Error::NotTrivalent);
    }
    check_boundary(g, boundary)?;
    let mut out = Vec::new();
    for s in support_sets(g) {
        let lambda = solve_support(g, &s, boundary)
            .ok_or_else(|| Error::InvalidGraph(format!("singular support matrix on {s:?}")))?;
        if s.iter().all(|&e| lambda[e].is_positive()) {
            let vanishing = (0..g.num_edges()).filter(|e| !s.contains(e)).collect();
            let density = density(g, &s)?;
            out.push(CellVertex { lambda, support: s, vanishing, density });
        }
    }
    Ok(out)
}

/// Affine chart of the cell anchored at a vertex: free coordinates are the
/// lengths of the vanishing edges.
#[derive(Clone, Debug)]
pub struct ThetaMap<T> {
    pub base: Vec<T>,
    /// `rays[k]` is the image of the `k`-th unit vector of the free
    /// coordinates minus `base`.
    pub rays: Vec<Vec<T>>,
    pub free: Vec<usize>,
}

impl<T: Scalar> ThetaMap<T> {
    pub fn new(g: &RibbonGraph, vertex: &CellVertex) -> Result<Self> {
        let rays = tangent_rays(g, vertex)?
            .into_iter()
            .map(|r| r.iter().map(T::from_ratio).collect())
            .collect();
        Ok(ThetaMap { base: vertex.lambda.iter().map(T::from_ratio).collect(), rays, free: vertex.vanishing.clone() })
    }

    /// Full edge-length vector for free coordinates `x`.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let mut out = self.base.clone();
        for (ray, xi) in self.rays.iter().zip(x) {
            if xi.is_zero() {
                continue;
            }
            for (o, r) in out.iter_mut().zip(ray) {
                *o = o.clone() + r.clone() * xi.clone();
            }
        }
        out
    }

    /// Free coordinates of a full edge-length vector.
    pub fn chart(&self, lengths: &[T]) -> Vec<T> {
        self.free.iter().map(|&e| lengths[e].clone()).collect()
    }
}

/// Directions of the tangent cone at a vertex: for each vanishing edge `e`,
/// the solution of the homogeneous system with unit length on `e` and zero on
/// the other vanishing edges.
pub fn tangent_rays(g: &RibbonGraph, vertex: &CellVertex) -> Result<Vec<Vec<BigRational>>> {
    let inc = g.incidence();
    let mut out = Vec::with_capacity(vertex.vanishing.len());
    for &e in &vertex.vanishing {
        let rhs: Vec<BigRational> = inc.iter().map(|row| int(-row[e])).collect();
        let mut ray = solve_support(g, &vertex.support, &rhs).ok_or(Error::Invalid("singular support".into()))?;
        ray[e] = BigRational::one();
        out.push(ray);
    }
    Ok(out)
}

/// Covering parameter together with the vertex data it was computed from.
#[derive(Clone, Debug)]
pub struct Cover {
    pub epsilon: BigRational,
}

impl Cover {
    /// Membership of `lengths` in the neighbourhood attached to `vertex`.
    pub fn contains<T: Scalar>(&self, vertex: &CellVertex, lengths: &[T]) -> bool {
        let eps = T::from_ratio(&self.epsilon);
        vertex.support.iter().all(|&e| lengths[e] > eps)
    }
}

/// `min lambda_e` over all graphs, vertices and support edges, divided by the
/// largest vertex count of a cell.
pub fn cover_epsilon(genus: usize, n: usize, boundary: &[BigRational]) -> Result<Cover> {
    let graphs = enumerate_trivalent(genus, n)?;
    cover_epsilon_for(&graphs, boundary)
}

/// Same as [`cover_epsilon`] over an explicit list of graphs.
pub fn cover_epsilon_for(graphs: &[RibbonGraph], boundary: &[BigRational]) -> Result<Cover> {
    let mut min: Option<BigRational> = None;
    let mut most = 1usize;
    for g in graphs {
        let verts = cell_vertices(g, boundary)?;
        most = most.max(verts.len());
        for v in &verts {
            for &e in &v.support {
                if min.as_ref().map_or(true, |m| v.lambda[e] < *m) {
                    min = Some(v.lambda[e].clone());
                }
            }
        }
    }
    let min = min.ok_or_else(|| Error::Invalid("no cell vertices".into()))?;
    Ok(Cover { epsilon: min / BigRational::from_integer(most.into()) })
}

/// Triangulation of a closed cell into simplices with vertices among the cell
/// vertices; each simplex lists indices into `vertices`.
pub fn cell_triangulation(g: &RibbonGraph, vertices: &[CellVertex]) -> Vec<Vec<usize>> {
    let gens: Vec<Vec<i64>> = vertices.iter().map(|v| integral_multiple(&v.lambda)).collect();
    let facets: Vec<Vec<i64>> = (0..g.num_edges())
        .map(|e| (0..g.num_edges()).map(|k| i64::from(k == e)).collect())
        .collect();
    pulling_triangulation(&gens, &facets)
}

fn integral_multiple(v: &[BigRational]) -> Vec<i64> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
    v.iter()
        .map(|x| {
            let scaled = (x * BigRational::from_integer(lcm.clone())).to_integer();
            i64::try_from(scaled).expect("cell vertex coordinates fit in i64")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ribbon::catalog;

    #[test]
    fn resonance() {
        assert!(is_nonresonant(&[int(1)]));
        assert!(!is_nonresonant(&[int(1), int(2), int(3)]));
        assert!(is_nonresonant(&[int(1), ratio(3, 2), ratio(9, 4), ratio(27, 8)]));
        assert!(is_nonresonant(&default_lengths(5, &int(10))));
    }

    #[test]
    fn theta_cell() {
        let t = catalog::theta();
        assert_eq!(support_sets(&t), vec![vec![0], vec![1], vec![2]]);
        let v = cell_vertices(&t, &[int(6)]).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v[0].lambda, vec![int(3), int(0), int(0)]);
        assert_eq!(v[0].density, int(1));
        let map: ThetaMap<BigRational> = ThetaMap::new(&t, &v[0]).unwrap();
        assert_eq!(map.apply(&[int(1), ratio(1, 2)]), vec![ratio(3, 2), int(1), ratio(1, 2)]);
        assert_eq!(cell_triangulation(&t, &v).len(), 1);
    }

    #[test]
    fn looped_chain_support_sets() {
        let g = catalog::looped_chain();
        let s = support_sets(&g);
        assert_eq!(s, vec![vec![0, 1, 2, 5], vec![0, 1, 3, 5], vec![0, 1, 4, 5], vec![0, 2, 4, 5], vec![0, 3, 4, 5]]);
    }
}
