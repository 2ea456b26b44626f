//! Pulling triangulations of pointed polyhedral cones.
//!
//! A cone is given by its generators (extremal rays, or vertices lifted to
//! height one for a polytope) together with a complete list of linear
//! inequalities `h . x >= 0`. Faces are exactly the sets of generators on
//! which some collection of inequalities vanishes, so facets of any face are
//! found from single inequalities.

use std::collections::{BTreeSet, HashMap};

use num_rational::BigRational;

use crate::linalg;
use crate::scalar::{int, Scalar};

struct Pulling<'a> {
    gens: &'a [Vec<i64>],
    zero_sets: Vec<Vec<bool>>,
    ranks: HashMap<Vec<usize>, usize>,
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Pulling<'_> {
    fn rank(&mut self, subset: &[usize]) -> usize {
        if let Some(&r) = self.ranks.get(subset) {
            return r;
        }
        let rows: Vec<Vec<BigRational>> =
            subset.iter().map(|&i| self.gens[i].iter().map(|&v| int(v)).collect()).collect();
        let r = linalg::rank(&rows);
        self.ranks.insert(subset.to_vec(), r);
        r
    }

    fn split(&mut self, face: &[usize], dim: usize) -> Vec<Vec<usize>> {
        if face.len() == dim {
            return vec![face.to_vec()];
        }
        let apex = face[0];
        let mut facets = BTreeSet::new();
        for h in 0..self.zero_sets.len() {
            if self.zero_sets[h][apex] {
                continue;
            }
            let sub: Vec<usize> = face.iter().copied().filter(|&i| self.zero_sets[h][i]).collect();
            if sub.len() + 1 >= dim && !facets.contains(&sub) && self.rank(&sub) + 1 == dim {
                facets.insert(sub);
            }
        }
        let mut out = Vec::new();
        for facet in facets {
            for mut simplex in self.split(&facet, dim - 1) {
                simplex.insert(0, apex);
                out.push(simplex);
            }
        }
        out
    }
}

/// Pulling triangulation of the cone spanned by `gens`, pulling generators in
/// index order. Every returned simplex lists `dim` generator indices, where
/// `dim` is the rank of `gens`.
pub fn pulling_triangulation(gens: &[Vec<i64>], inequalities: &[Vec<i64>]) -> Vec<Vec<usize>> {
    if gens.is_empty() {
        return vec![Vec::new()];
    }
    let zero_sets = inequalities.iter().map(|h| gens.iter().map(|g| dot(h, g) == 0).collect()).collect();
    let mut p = Pulling { gens, zero_sets, ranks: HashMap::new() };
    let all: Vec<usize> = (0..gens.len()).collect();
    let dim = p.rank(&all);
    p.split(&all, dim)
}

/// Exact Lebesgue volume of the simplex with the given vertices in `R^d`
/// (`d + 1` vertices of length `d`).
pub fn simplex_volume<T: Scalar>(vertices: &[Vec<T>]) -> T {
    let d = vertices.len() - 1;
    let rows: Vec<Vec<T>> = vertices[1..]
        .iter()
        .map(|v| v.iter().zip(&vertices[0]).map(|(a, b)| a.clone() - b.clone()).collect())
        .collect();
    let det = linalg::determinant(&rows).abs();
    let mut fact = T::one();
    for k in 2..=d {
        fact = fact * T::from_int(k as i64);
    }
    det / fact
}
