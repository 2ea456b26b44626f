//! Exact evaluation of the combinatorial Thurston volume of the unit ball.

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::curves::{
    self, admissible_inequalities, cone_decomposition_with, corners, det_simplex, is_extremal, loops_and_dumbbells,
    ConeDecomposition, RayOrder,
};
use crate::error::{Error, Result};
use crate::ribbon::RibbonGraph;
use crate::scalar::{factorial, Scalar};
use crate::triangulate::pulling_triangulation;

/// One simplicial cone's contribution `det / (d! * prod <l, ray>)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Term {
    pub det: u64,
    pub rays: Vec<Vec<i64>>,
}

/// Sum-of-terms rational function of the edge lengths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BvolRationalForm {
    /// Degree of homogeneity (negated) and factorial in the prefactor.
    pub dim: usize,
    pub terms: Vec<Term>,
}

impl BvolRationalForm {
    pub fn from_decomposition(dec: &ConeDecomposition) -> Self {
        let terms = dec
            .cones
            .iter()
            .flat_map(|c| c.simplices.iter())
            .map(|s| Term { det: s.det, rays: s.rays.iter().map(|&i| dec.curves[i].vector.clone()).collect() })
            .collect();
        BvolRationalForm { dim: dec.dim, terms }
    }

    /// Value at `lengths`; errors if a ray has non-positive length.
    pub fn evaluate<T: Scalar>(&self, lengths: &[T]) -> Result<T> {
        let mut total = T::zero();
        for term in &self.terms {
            let mut denom = T::one();
            for ray in &term.rays {
                let len = ray
                    .iter()
                    .zip(lengths)
                    .filter(|(c, _)| **c != 0)
                    .fold(T::zero(), |acc, (&c, l)| acc + T::from_int(c) * l.clone());
                if !len.is_positive() {
                    return Err(Error::DegenerateResolution);
                }
                denom = denom * len;
            }
            total = total + T::from_int(term.det as i64) / denom;
        }
        let mut fact = T::one();
        for k in 2..=self.dim {
            fact = fact * T::from_int(k as i64);
        }
        Ok(total / fact)
    }
}

fn check_lengths<T: Scalar>(g: &RibbonGraph, lengths: &[T]) -> Result<()> {
    if lengths.len() != g.num_edges() {
        return Err(Error::LengthMismatch { expected: g.num_edges(), got: lengths.len() });
    }
    if lengths.iter().any(|l| !l.is_positive()) {
        return Err(Error::NonPositiveLength);
    }
    Ok(())
}

/// Boundary lengths `L_i = sum_e a_{i,e} l_e`.
pub fn boundary_lengths<T: Scalar>(g: &RibbonGraph, lengths: &[T]) -> Vec<T> {
    g.incidence()
        .iter()
        .map(|row| row.iter().zip(lengths).fold(T::zero(), |acc, (&a, l)| acc + T::from_int(a) * l.clone()))
        .collect()
}

/// Rational form of a trivalent graph.
pub fn bvol_form(g: &RibbonGraph) -> Result<BvolRationalForm> {
    bvol_form_with(g, RayOrder::Lexicographic)
}

/// Rational form built from a triangulation that pulls rays in `order`.
pub fn bvol_form_with(g: &RibbonGraph, order: RayOrder) -> Result<BvolRationalForm> {
    Ok(BvolRationalForm::from_decomposition(&cone_decomposition_with(g, order)?))
}

/// Exact volume at a trivalent metric.
pub fn bcomb(g: &RibbonGraph, lengths: &[BigRational]) -> Result<BigRational> {
    check_lengths(g, lengths)?;
    bvol_form(g)?.evaluate(lengths)
}

/// `d! / (d + n)! * bcomb / prod L_i` with `d = 6g - 6 + 2n`.
pub fn bcomb_bullet(g: &RibbonGraph, lengths: &[BigRational]) -> Result<BigRational> {
    let value = bcomb(g, lengths)?;
    Ok(bullet_from(g, &value, lengths))
}

fn bullet_from(g: &RibbonGraph, value: &BigRational, lengths: &[BigRational]) -> BigRational {
    let (genus, n) = g.graph_type();
    let d = 6 * genus + 2 * n - 6;
    let perimeter: BigRational = boundary_lengths(g, lengths).into_iter().product();
    let ratio = BigRational::new(factorial(d), factorial(d + n));
    ratio * value / perimeter
}

/// Volume of `{x admissible : <l, x> <= 1}` relative to the multicurve
/// lattice, computed by triangulating the full admissible cone.
pub fn bullet_cone_volume(g: &RibbonGraph, lengths: &[BigRational]) -> Result<BigRational> {
    check_lengths(g, lengths)?;
    let cs = corners(g)?;
    let ineqs = admissible_inequalities(g, &cs);
    let e = g.num_edges();
    let mut candidates: Vec<Vec<i64>> = loops_and_dumbbells(g)?.into_iter().map(|c| c.vector).collect();
    candidates.extend((0..g.num_faces()).map(|i| g.face_vector(i)));
    candidates.sort();
    candidates.dedup();
    let rays: Vec<Vec<i64>> = candidates.into_iter().filter(|r| is_extremal(r, &ineqs, &[], e)).collect();
    let mut total = BigRational::zero();
    for simplex in pulling_triangulation(&rays, &ineqs) {
        let vecs: Vec<Vec<i64>> = simplex.iter().map(|&i| rays[i].clone()).collect();
        let det = det_simplex(g, &vecs)?;
        let prod: BigRational = vecs
            .iter()
            .map(|r| r.iter().zip(lengths).map(|(&c, l)| l * BigRational::from_integer(c.into())).sum::<BigRational>())
            .product();
        total += BigRational::from_integer(det.into()) / prod;
    }
    Ok(total / BigRational::from_integer(factorial(e)))
}

/// Extremal rays of the full admissible cone.
pub fn admissible_cone_rays(g: &RibbonGraph) -> Result<Vec<Vec<i64>>> {
    let cs = corners(g)?;
    let ineqs = admissible_inequalities(g, &cs);
    let mut candidates: Vec<Vec<i64>> = loops_and_dumbbells(g)?.into_iter().map(|c| c.vector).collect();
    candidates.extend((0..g.num_faces()).map(|i| g.face_vector(i)));
    candidates.sort();
    candidates.dedup();
    Ok(candidates.into_iter().filter(|r| is_extremal(r, &ineqs, &[], g.num_edges())).collect())
}

/// Trivalent resolution of a reduced graph.
#[derive(Clone, Debug)]
pub struct Resolution {
    pub graph: RibbonGraph,
    /// Edges of `graph` beyond the original ones (all of zero length).
    pub added_edges: Vec<usize>,
}

/// Splits every vertex of valency above three into trivalent pieces joined by
/// new edges. Original edges keep their indices. `offset` rotates where each
/// split starts, giving different resolutions.
pub fn resolve(g: &RibbonGraph, offset: usize) -> Result<Resolution> {
    if !g.is_reduced() {
        return Err(Error::InvalidGraph("resolution needs every valency at least three".into()));
    }
    let original_edges = g.num_edges();
    let mut sigma = g.sigma().to_vec();
    let mut iota = g.iota().to_vec();
    let mut labels = g.face_labels().to_vec();
    loop {
        let current = RibbonGraph::new(sigma.clone(), iota.clone(), labels.clone())?;
        let Some(v) = (0..current.num_vertices()).find(|&v| current.valency(v) > 3) else { break };
        let ring = current.vertex_darts(v);
        let k = ring.len();
        let c: Vec<usize> = (0..k).map(|i| ring[(i + offset) % k]).collect();
        let (x, y) = (sigma.len(), sigma.len() + 1);
        sigma.extend([c[0], c[2]]);
        iota.extend([y, x]);
        labels.extend([labels[c[k - 1]], labels[c[1]]]);
        sigma[c[1]] = x;
        sigma[c[k - 1]] = y;
    }
    let graph = RibbonGraph::new(sigma, iota, labels)?;
    debug_assert_eq!(graph.graph_type(), g.graph_type());
    let added_edges = (original_edges..graph.num_edges()).collect();
    Ok(Resolution { graph, added_edges })
}

/// Rational form on the edges of a reduced graph, obtained through a trivalent
/// resolution with zero-length new edges.
pub fn resolved_form(g: &RibbonGraph, offset: usize) -> Result<BvolRationalForm> {
    if g.is_trivalent() {
        return bvol_form(g);
    }
    let res = resolve(g, offset)?;
    let form = bvol_form(&res.graph)?;
    let e = g.num_edges();
    let mut terms = Vec::with_capacity(form.terms.len());
    for t in form.terms {
        let rays: Vec<Vec<i64>> = t.rays.iter().map(|r| r[..e].to_vec()).collect();
        if rays.iter().any(|r| r.iter().all(|&v| v == 0)) {
            return Err(Error::DegenerateResolution);
        }
        terms.push(Term { det: t.det, rays });
    }
    Ok(BvolRationalForm { dim: form.dim, terms })
}

/// Volume at a metric on a reduced graph; two resolutions are evaluated and
/// must agree.
pub fn bcomb_resolved(g: &RibbonGraph, lengths: &[BigRational]) -> Result<BigRational> {
    check_lengths(g, lengths)?;
    let first = resolved_form(g, 0)?.evaluate(lengths)?;
    if !g.is_trivalent() {
        let second = resolved_form(g, 1)?.evaluate(lengths)?;
        if second != first {
            return Err(Error::ResolutionMismatch(format!("{first} vs {second}")));
        }
    }
    Ok(first)
}

/// `bcomb` on a `(0,3)` graph is the constant one; kept explicit for callers.
pub fn is_constant_type(g: &RibbonGraph) -> bool {
    g.graph_type() == (0, 3)
}

/// Sanity value used by callers that need the multicurve lattice covolume.
pub fn covolume(g: &RibbonGraph) -> BigRational {
    BigRational::from_integer(curves::lattice_covolume(g).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ribbon::catalog;
    use crate::scalar::{int, ratio};

    #[test]
    fn torus_values() {
        let t = catalog::theta();
        assert_eq!(bcomb(&t, &[int(1), int(1), int(1)]).unwrap(), ratio(3, 8));
        assert_eq!(bcomb(&t, &[int(1), int(2), int(3)]).unwrap(), ratio(1, 10));
        assert_eq!(bcomb_bullet(&t, &[int(1), int(1), int(1)]).unwrap(), ratio(1, 48));
        assert!(bcomb(&t, &[int(1), int(0), int(1)]).is_err());
    }

    #[test]
    fn pants_is_one() {
        let p = catalog::planar_theta();
        assert_eq!(bcomb(&p, &[ratio(1, 3), int(2), int(5)]).unwrap(), int(1));
    }

    #[test]
    fn quadrivalent_resolution() {
        let q = catalog::quadrivalent_torus();
        let v = bcomb_resolved(&q, &[int(2), int(5)]).unwrap();
        assert_eq!(v, ratio(1, 10));
    }

    #[test]
    fn bullet_route_agrees_on_torus() {
        let t = catalog::theta();
        let l = [int(1), int(2), int(3)];
        assert_eq!(bullet_cone_volume(&t, &l).unwrap(), bcomb_bullet(&t, &l).unwrap());
    }
}
