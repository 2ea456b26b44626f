//! Dense Gaussian elimination over any [`Scalar`].

use crate::scalar::Scalar;

fn negligible<T: Scalar>(v: &T, scale: f64) -> bool {
    if T::EXACT {
        v.is_zero()
    } else {
        v.to_f64().abs() <= 1e-11 * scale.max(1.0)
    }
}

fn magnitude(rows: &[Vec<impl Scalar>]) -> f64 {
    rows.iter()
        .flat_map(|r| r.iter())
        .map(|v| v.to_f64().abs())
        .fold(0.0, f64::max)
}

/// Reduces `m` in place to row echelon form over its first `cols` columns and
/// returns the pivot columns.
fn echelon<T: Scalar>(m: &mut [Vec<T>], cols: usize) -> Vec<usize> {
    let scale = magnitude(m);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == m.len() {
            break;
        }
        let candidate = if T::EXACT {
            (row..m.len()).find(|&r| !m[r][col].is_zero())
        } else {
            (row..m.len())
                .max_by(|&a, &b| {
                    let (x, y) = (m[a][col].to_f64().abs(), m[b][col].to_f64().abs());
                    x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal)
                })
                .filter(|&r| !negligible(&m[r][col], scale))
        };
        let Some(p) = candidate else { continue };
        m.swap(row, p);
        let pivot = m[row][col].clone();
        for r in row + 1..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone() / pivot.clone();
            for c in col..m[r].len() {
                let delta = f.clone() * m[row][c].clone();
                m[r][c] = m[r][c].clone() - delta;
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

/// Rank of the row set.
pub fn rank<T: Scalar>(rows: &[Vec<T>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut m = rows.to_vec();
    echelon(&mut m, cols).len()
}

/// Determinant of a square matrix.
pub fn determinant<T: Scalar>(a: &[Vec<T>]) -> T {
    let n = a.len();
    let mut m = a.to_vec();
    let mut det = T::one();
    for col in 0..n {
        let p = if T::EXACT {
            (col..n).find(|&r| !m[r][col].is_zero())
        } else {
            (col..n).max_by(|&x, &y| {
                m[x][col]
                    .to_f64()
                    .abs()
                    .partial_cmp(&m[y][col].to_f64().abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        };
        let Some(p) = p else { return T::zero() };
        if m[p][col].is_zero() {
            return T::zero();
        }
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        let pivot = m[col][col].clone();
        det = det * pivot.clone();
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone() / pivot.clone();
            for c in col..n {
                let delta = f.clone() * m[col][c].clone();
                m[r][c] = m[r][c].clone() - delta;
            }
        }
    }
    det
}

/// Solves the square system `a x = b`; `None` when singular.
pub fn solve<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let n = a.len();
    let mut m: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = echelon(&mut m, n);
    if pivots.len() < n {
        return None;
    }
    back_substitute(&m, n)
}

fn back_substitute<T: Scalar>(m: &[Vec<T>], n: usize) -> Option<Vec<T>> {
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut acc = m[i][n].clone();
        for j in i + 1..n {
            acc = acc - m[i][j].clone() * x[j].clone();
        }
        x[i] = acc / m[i][i].clone();
    }
    Some(x)
}

/// Inverse of a square matrix; `None` when singular.
pub fn inverse<T: Scalar>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<T> = (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect();
        cols.push(solve(a, &e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}

/// Coefficients `c` with `Σ c_i basis_i = target`, if `target` lies in the span.
/// `basis` must be linearly independent.
pub fn coordinates<T: Scalar>(basis: &[Vec<T>], target: &[T]) -> Option<Vec<T>> {
    let k = basis.len();
    let dim = target.len();
    let mut m: Vec<Vec<T>> = (0..dim)
        .map(|row| {
            let mut r: Vec<T> = basis.iter().map(|b| b[row].clone()).collect();
            r.push(target[row].clone());
            r
        })
        .collect();
    let pivots = echelon(&mut m, k);
    if pivots.len() < k {
        return None;
    }
    let scale = magnitude(&m);
    if m[k..].iter().any(|r| !negligible(&r[k], scale)) {
        return None;
    }
    back_substitute(&m[..k], k)
}

/// Matrix-vector product.
pub fn mat_vec<T: Scalar>(a: &[Vec<T>], x: &[T]) -> Vec<T> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(T::zero(), |acc, (u, v)| acc + u.clone() * v.clone())
        })
        .collect()
}
