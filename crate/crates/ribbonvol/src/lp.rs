//! Exact dense simplex method with Bland's rule.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: BigRational, point: Vec<BigRational> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<BigRational>>,
    rhs: Vec<BigRational>,
    objective: Vec<BigRational>,
    /// Negated objective value.
    objective_rhs: BigRational,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = &*v / &p;
        }
        self.rhs[r] = &self.rhs[r] / &p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (v, pr) in self.rows[i].iter_mut().zip(&pivot_row) {
                *v -= &f * pr;
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        if !self.objective[c].is_zero() {
            let f = self.objective[c].clone();
            for (v, pr) in self.objective.iter_mut().zip(&pivot_row) {
                *v -= &f * pr;
            }
            self.objective_rhs -= &f * &pivot_rhs;
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule to optimality; `false` if unbounded.
    fn optimise(&mut self) -> bool {
        loop {
            let Some(c) = self.objective.iter().position(|v| v.is_positive()) else { return true };
            let mut best: Option<(BigRational, usize, usize)> = None;
            for r in 0..self.rows.len() {
                if !self.rows[r][c].is_positive() {
                    continue;
                }
                let ratio = &self.rhs[r] / &self.rows[r][c];
                let better = match &best {
                    None => true,
                    Some((q, _, b)) => ratio < *q || (ratio == *q && self.basis[r] < *b),
                };
                if better {
                    best = Some((ratio, r, self.basis[r]));
                }
            }
            match best {
                None => return false,
                Some((_, r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// Maximises `c . x` subject to `a x <= b`, `x >= 0`.
pub fn maximize(c: &[BigRational], a: &[Vec<BigRational>], b: &[BigRational]) -> LpOutcome {
    let (m, n) = (a.len(), c.len());
    let aux = n + m;
    let width = n + m + 1;
    let zero = BigRational::zero();
    let one = BigRational::from_integer(1.into());
    let mut rows = Vec::with_capacity(m);
    for (i, row) in a.iter().enumerate() {
        let mut r = vec![zero.clone(); width];
        r[..n].clone_from_slice(row);
        r[n + i] = one.clone();
        r[aux] = -one.clone();
        rows.push(r);
    }
    let mut t = Tableau {
        rows,
        rhs: b.to_vec(),
        objective: vec![zero.clone(); width],
        objective_rhs: zero.clone(),
        basis: (n..n + m).collect(),
    };
    let most_negative = (0..m).filter(|&i| b[i].is_negative()).min_by(|&i, &j| b[i].cmp(&b[j]));
    if let Some(r) = most_negative {
        t.objective[aux] = -one.clone();
        t.pivot(r, aux);
        t.optimise();
        if t.objective_rhs.is_positive() {
            return LpOutcome::Infeasible;
        }
        if let Some(r) = t.basis.iter().position(|&v| v == aux) {
            let c = (0..aux).find(|&c| !t.rows[r][c].is_zero()).expect("auxiliary row has a nonzero entry");
            t.pivot(r, c);
        }
    }
    for row in t.rows.iter_mut() {
        row[aux] = zero.clone();
    }
    t.objective = vec![zero.clone(); width];
    t.objective[..n].clone_from_slice(c);
    t.objective_rhs = zero.clone();
    for r in 0..m {
        let v = t.basis[r];
        if t.objective[v].is_zero() {
            continue;
        }
        let f = t.objective[v].clone();
        for (o, x) in t.objective.iter_mut().zip(&t.rows[r]) {
            *o -= &f * x;
        }
        t.objective_rhs -= &f * &t.rhs[r];
    }
    if !t.optimise() {
        return LpOutcome::Unbounded;
    }
    let mut point = vec![zero; n];
    for (r, &v) in t.basis.iter().enumerate() {
        if v < n {
            point[v] = t.rhs[r].clone();
        }
    }
    LpOutcome::Optimal { value: -t.objective_rhs, point }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn q(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3
        let out = maximize(&q(&[3, 2]), &[q(&[1, 1]), q(&[1, 3]), q(&[1, 0])], &q(&[4, 6, 3]));
        assert_eq!(out, LpOutcome::Optimal { value: int(11), point: q(&[3, 1]) });
    }

    #[test]
    fn needs_phase_one() {
        // max -x - y, x + y >= 1, x - y <= 1/2
        let a = vec![q(&[-1, -1]), q(&[1, -1])];
        let b = vec![int(-1), ratio(1, 2)];
        match maximize(&q(&[-1, -1]), &a, &b) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, int(-1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        assert_eq!(maximize(&q(&[1]), &[q(&[1]), q(&[-1])], &q(&[1, -2])), LpOutcome::Infeasible);
        assert_eq!(maximize(&q(&[1]), &[q(&[-1])], &q(&[0])), LpOutcome::Unbounded);
    }
}
