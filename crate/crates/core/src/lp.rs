//! Exact two-phase simplex over `Rat`.
//!
//! Dense tableau, Bland's rule (so it always terminates), sparse row updates.
//! Instances in this crate have at most a few hundred rows.

use alloc::vec;
use alloc::vec::Vec;

use crate::rat::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<(usize, Rat)>,
    rel: Relation,
    rhs: Rat,
}

/// A linear program over variables `x_0 .. x_{n-1}`, nonnegative unless
/// declared free.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    n: usize,
    free: Vec<bool>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { value: Rat, point: Vec<Rat> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<(Rat, Vec<Rat>)> {
        match self {
            LpOutcome::Optimal { value, point } => Some((value, point)),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(n: usize) -> Self {
        LinearProgram {
            n,
            free: vec![false; n],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn set_free(&mut self, var: usize) {
        self.free[var] = true;
    }

    /// Adds `sum coeffs · x  rel  rhs`. Repeated indices are summed.
    pub fn constrain(&mut self, coeffs: &[(usize, Rat)], rel: Relation, rhs: Rat) {
        let mut merged: Vec<(usize, Rat)> = Vec::with_capacity(coeffs.len());
        for &(i, c) in coeffs {
            assert!(i < self.n, "variable index out of range");
            match merged.iter_mut().find(|(j, _)| *j == i) {
                Some((_, acc)) => *acc += c,
                None => merged.push((i, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        self.rows.push(Row {
            coeffs: merged,
            rel,
            rhs,
        });
    }

    pub fn maximize(&self, objective: &[(usize, Rat)]) -> LpOutcome {
        self.solve(objective, false)
    }

    pub fn minimize(&self, objective: &[(usize, Rat)]) -> LpOutcome {
        self.solve(objective, true)
    }

    fn solve(&self, objective: &[(usize, Rat)], minimize: bool) -> LpOutcome {
        // Column layout: structural columns (free vars split in two), then one
        // slack or surplus per inequality row, then artificials.
        let mut col_of = Vec::with_capacity(self.n);
        let mut ncols = 0;
        for &f in &self.free {
            col_of.push(ncols);
            ncols += if f { 2 } else { 1 };
        }
        let structural = ncols;
        let m = self.rows.len();
        let n_slack = self.rows.iter().filter(|r| r.rel != Relation::Eq).count();
        let slack_start = structural;
        let art_start = slack_start + n_slack;

        let mut needs_art = Vec::with_capacity(m);
        for r in &self.rows {
            let flip = r.rhs.is_negative();
            let rel = match (r.rel, flip) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (rel, _) => rel,
            };
            needs_art.push(rel != Relation::Le);
        }
        let n_art = needs_art.iter().filter(|&&a| a).count();
        let width = art_start + n_art;

        let mut t = Tableau {
            a: vec![vec![Rat::ZERO; width + 1]; m],
            basis: vec![0; m],
            width,
            z: Vec::new(),
        };
        let mut slack = slack_start;
        let mut art = art_start;
        for (i, r) in self.rows.iter().enumerate() {
            let sign = if r.rhs.is_negative() {
                -Rat::ONE
            } else {
                Rat::ONE
            };
            let row = &mut t.a[i];
            for &(v, c) in &r.coeffs {
                let c = c * sign;
                row[col_of[v]] += c;
                if self.free[v] {
                    row[col_of[v] + 1] -= c;
                }
            }
            row[width] = r.rhs * sign;
            let rel = if sign.is_negative() {
                match r.rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                }
            } else {
                r.rel
            };
            match rel {
                Relation::Le => {
                    row[slack] = Rat::ONE;
                    t.basis[i] = slack;
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rat::ONE;
                    slack += 1;
                    row[art] = Rat::ONE;
                    t.basis[i] = art;
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = Rat::ONE;
                    t.basis[i] = art;
                    art += 1;
                }
            }
        }

        // Phase 1: maximize −Σ artificials.
        if n_art > 0 {
            let mut cost = vec![Rat::ZERO; width];
            for c in cost.iter_mut().skip(art_start) {
                *c = -Rat::ONE;
            }
            match t.optimize(&cost, width) {
                Pivoting::Optimal => {}
                Pivoting::Unbounded => unreachable!("phase one is bounded"),
            }
            let infeas: Rat = (0..t.a.len())
                .filter(|&i| t.basis[i] >= art_start)
                .map(|i| t.a[i][width])
                .sum();
            if infeas.is_positive() {
                return LpOutcome::Infeasible;
            }
            // Drive zero-level artificials out of the basis.
            let mut i = 0;
            while i < t.a.len() {
                if t.basis[i] >= art_start {
                    match (0..art_start).find(|&j| !t.a[i][j].is_zero()) {
                        Some(j) => {
                            t.pivot(i, j);
                            i += 1;
                        }
                        None => {
                            t.a.remove(i);
                            t.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }

        // Phase 2 over the non-artificial columns.
        let mut cost = vec![Rat::ZERO; width];
        for &(v, c) in objective {
            let c = if minimize { -c } else { c };
            cost[col_of[v]] += c;
            if self.free[v] {
                cost[col_of[v] + 1] -= c;
            }
        }
        if let Pivoting::Unbounded = t.optimize(&cost, art_start) {
            return LpOutcome::Unbounded;
        }
        let mut values = vec![Rat::ZERO; width];
        for (i, &b) in t.basis.iter().enumerate() {
            values[b] = t.a[i][width];
        }
        let point: Vec<Rat> = (0..self.n)
            .map(|v| {
                let c = col_of[v];
                if self.free[v] {
                    values[c] - values[c + 1]
                } else {
                    values[c]
                }
            })
            .collect();
        let value: Rat = objective.iter().map(|&(v, c)| c * point[v]).sum();
        LpOutcome::Optimal { value, point }
    }
}

enum Pivoting {
    Optimal,
    Unbounded,
}

struct Tableau {
    a: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    width: usize,
    /// Reduced-cost row of the objective being optimized (empty otherwise).
    z: Vec<Rat>,
}

impl Tableau {
    /// Maximizes `cost · x` using only columns `< allowed` as entering
    /// candidates.
    fn optimize(&mut self, cost: &[Rat], allowed: usize) -> Pivoting {
        // Reduced costs c_j − Σ_i c_{B(i)} a_ij, kept up to date by `pivot`.
        let mut z: Vec<Rat> = cost.to_vec();
        z.push(Rat::ZERO);
        for (i, row) in self.a.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (zk, &v) in z.iter_mut().zip(row) {
                if !v.is_zero() {
                    *zk -= cb * v;
                }
            }
        }
        self.z = z;
        loop {
            // Bland: first improving column, then the lowest-index basic
            // variable among tied ratios.
            let Some(j) = (0..allowed).find(|&j| self.z[j].is_positive()) else {
                return Pivoting::Optimal;
            };
            let mut leave: Option<(usize, Rat)> = None;
            for (i, row) in self.a.iter().enumerate() {
                if row[j].is_positive() {
                    let ratio = row[self.width] / row[j];
                    let better = match leave {
                        None => true,
                        Some((k, best)) => {
                            ratio < best || (ratio == best && self.basis[i] < self.basis[k])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((i, _)) = leave else {
                return Pivoting::Unbounded;
            };
            self.pivot(i, j);
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let p = self.a[pr][pc];
        if p != Rat::ONE {
            for v in self.a[pr].iter_mut() {
                if !v.is_zero() {
                    *v = *v / p;
                }
            }
        }
        let prow = core::mem::take(&mut self.a[pr]);
        let nz: Vec<usize> = (0..prow.len()).filter(|&k| !prow[k].is_zero()).collect();
        let others = self
            .a
            .iter_mut()
            .enumerate()
            .filter(|(i, _)| *i != pr)
            .map(|(_, r)| r);
        for row in others.chain(core::iter::once(&mut self.z)) {
            let f = if pc < row.len() { row[pc] } else { Rat::ZERO };
            if f.is_zero() {
                continue;
            }
            for &k in &nz {
                row[k] -= f * prow[k];
            }
        }
        self.a[pr] = prow;
        self.basis[pr] = pc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::q;

    fn r(n: i128) -> Rat {
        Rat::int(n)
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → 36 at (2, 6)
        let mut lp = LinearProgram::new(2);
        lp.constrain(&[(0, r(1))], Relation::Le, r(4));
        lp.constrain(&[(1, r(2))], Relation::Le, r(12));
        lp.constrain(&[(0, r(3)), (1, r(2))], Relation::Le, r(18));
        let (v, x) = lp.maximize(&[(0, r(3)), (1, r(5))]).optimal().unwrap();
        assert_eq!(v, r(36));
        assert_eq!(x, vec![r(2), r(6)]);
    }

    #[test]
    fn equality_and_free_variables() {
        // min x subject to x − y = −3/2, y ∈ [0, 1], x free → −3/2
        let mut lp = LinearProgram::new(2);
        lp.set_free(0);
        lp.constrain(&[(0, r(1)), (1, r(-1))], Relation::Eq, q(-3, 2));
        lp.constrain(&[(1, r(1))], Relation::Le, r(1));
        let (v, x) = lp.minimize(&[(0, r(1))]).optimal().unwrap();
        assert_eq!(v, q(-3, 2));
        assert_eq!(x[1], r(0));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.constrain(&[(0, r(1))], Relation::Ge, r(2));
        lp.constrain(&[(0, r(1))], Relation::Le, r(1));
        assert_eq!(lp.maximize(&[(0, r(1))]), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(1);
        lp.constrain(&[(0, r(1))], Relation::Ge, r(2));
        assert_eq!(lp.maximize(&[(0, r(1))]), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_redundant_rows() {
        // Duplicate equality rows leave an artificial at level zero.
        let mut lp = LinearProgram::new(2);
        lp.constrain(&[(0, r(1)), (1, r(1))], Relation::Eq, r(1));
        lp.constrain(&[(0, r(2)), (1, r(2))], Relation::Eq, r(2));
        let (v, _) = lp.maximize(&[(0, r(1))]).optimal().unwrap();
        assert_eq!(v, r(1));
    }

    #[test]
    fn brute_force_small_boxes() {
        // max c·x over a box intersected with one half-space, compared with
        // the vertex enumeration of the two-dimensional polygon.
        for a in -2..=2i128 {
            for b in -2..=2i128 {
                for c in 0..=3i128 {
                    let mut lp = LinearProgram::new(2);
                    lp.constrain(&[(0, r(1))], Relation::Le, r(2));
                    lp.constrain(&[(1, r(1))], Relation::Le, r(2));
                    lp.constrain(&[(0, r(a)), (1, r(b))], Relation::Le, r(c));
                    let got = lp.maximize(&[(0, r(1)), (1, r(2))]);
                    // Brute force over a fine grid containing all vertices.
                    let mut best: Option<Rat> = None;
                    for xn in 0..=48 {
                        for yn in 0..=48 {
                            let (x, y) = (q(xn, 24), q(yn, 24));
                            if r(a) * x + r(b) * y <= r(c) {
                                let v = x + r(2) * y;
                                best = Some(best.map_or(v, |bv: Rat| bv.max(v)));
                            }
                        }
                    }
                    match got {
                        LpOutcome::Optimal { value, .. } => assert_eq!(Some(value), best),
                        other => panic!("unexpected {:?}", other),
                    }
                }
            }
        }
    }
}
