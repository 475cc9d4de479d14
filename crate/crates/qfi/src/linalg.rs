//! Exact Gaussian elimination over the rationals, and a floating rank helper.

use num_traits::{One, Zero};

use crate::symexpr::Rat;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut [Vec<Rat>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map(|r| r.len()).unwrap_or(0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|i| !m[*i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &[Vec<Rat>]) -> usize {
    let mut a = m.to_vec();
    rref(&mut a).len()
}

/// Solve `a x = b` exactly; free variables are set to zero. `None` if inconsistent.
pub fn solve(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = a.first().map(|r| r.len()).unwrap_or(0);
    let mut aug: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&n) {
        return None;
    }
    let mut x = vec![Rat::zero(); n];
    for (i, c) in pivots.iter().enumerate() {
        x[*c] = aug[i][n].clone();
    }
    Some(x)
}

pub fn identity(n: usize) -> Vec<Vec<Rat>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect()).collect()
}

/// Numerical rank from singular values, relative threshold `rel_tol`.
pub fn float_rank(rows: &[Vec<f64>], rel_tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = nalgebra::DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|s| **s > rel_tol * max).count()
}
