//! Exact dense linear algebra for the small systems of the Banach module.

use alloc::vec;
use alloc::vec::Vec;

use crate::rat::Rat;

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn add(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn scale(c: Rat, a: &[Rat]) -> Vec<Rat> {
    a.iter().map(|&x| c * x).collect()
}

pub fn neg(a: &[Rat]) -> Vec<Rat> {
    a.iter().map(|&x| -x).collect()
}

pub fn is_zero(a: &[Rat]) -> bool {
    a.iter().all(|x| x.is_zero())
}

/// Row-reduces `m` in place and returns the pivot columns.
fn reduce(m: &mut [Vec<Rat>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = *x * inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    pivots
}

pub fn rank(rows: &[Vec<Rat>]) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut m = rows.to_vec();
    reduce(&mut m, cols).len()
}

/// Unique solution of the square system `a x = b`, if `a` is invertible.
pub fn solve(a: &[Vec<Rat>], b: &[Rat]) -> Option<Vec<Rat>> {
    let n = a.len();
    let mut m: Vec<Vec<Rat>> = a
        .iter()
        .zip(b)
        .map(|(row, &v)| {
            let mut r = row.clone();
            r.push(v);
            r
        })
        .collect();
    let pivots = reduce(&mut m, n);
    if pivots.len() < n {
        return None;
    }
    Some(m.iter().map(|r| r[n]).collect())
}

/// Indices of a maximal linearly independent subfamily, chosen greedily in
/// order.
pub fn independent_rows(rows: &[Vec<Rat>]) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    let mut basis: Vec<Vec<Rat>> = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        basis.push(r.clone());
        if rank(&basis) == basis.len() {
            chosen.push(i);
        } else {
            basis.pop();
        }
    }
    chosen
}

/// Coefficients `c` with `Σ c_j basis_j = v`, when `v` is in the span of the
/// independent family `basis`.
pub fn coordinates(basis: &[Vec<Rat>], v: &[Rat]) -> Option<Vec<Rat>> {
    let k = basis.len();
    let dim = v.len();
    // Columns are basis vectors; rows are coordinates.
    let mut m: Vec<Vec<Rat>> = (0..dim)
        .map(|i| {
            let mut r: Vec<Rat> = basis.iter().map(|b| b[i]).collect();
            r.push(v[i]);
            r
        })
        .collect();
    let pivots = reduce(&mut m, k);
    if pivots.len() < k {
        return None;
    }
    if m.iter().skip(k).any(|r| !r[k].is_zero()) {
        return None;
    }
    Some(m.iter().take(k).map(|r| r[k]).collect())
}

/// Vertices of the bounded polytope `{x : ⟨a_i, x⟩ ≤ b_i}` in dimension
/// `dim`, by solving every `dim`-subset of constraints as equalities.
/// Sorted and deduplicated.
pub fn polytope_vertices(constraints: &[(Vec<Rat>, Rat)], dim: usize) -> Vec<Vec<Rat>> {
    let mut out: Vec<Vec<Rat>> = Vec::new();
    if dim == 0 {
        return vec![Vec::new()];
    }
    let k = constraints.len();
    if k < dim {
        return out;
    }
    let mut idx: Vec<usize> = (0..dim).collect();
    loop {
        let a: Vec<Vec<Rat>> = idx.iter().map(|&i| constraints[i].0.clone()).collect();
        let b: Vec<Rat> = idx.iter().map(|&i| constraints[i].1).collect();
        if let Some(x) = solve(&a, &b) {
            if constraints.iter().all(|(c, r)| dot(c, &x) <= *r) {
                out.push(x);
            }
        }
        // Next combination in lexicographic order.
        let mut p = dim;
        while p > 0 && idx[p - 1] == k - dim + p - 1 {
            p -= 1;
        }
        if p == 0 {
            break;
        }
        idx[p - 1] += 1;
        for j in p..dim {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out.sort();
    out.dedup();
    out
}
