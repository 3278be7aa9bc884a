//! Back-and-forth between finite approximations: a growing correspondence
//! `R` with half-distortion `c` and slack `δ`, encoded as `θ = ψ_R + δ`
//! where `ψ_R(x, y) = min_k d(x, x_k) + c + d(y_k, y)`.

use alloc::format;
use alloc::vec::Vec;

use super::check::MetricPoints;
use super::EngineError;
use crate::apx::{
    limit_of_decreasing, r_surjective, r_total, strictly_refines, ApproxIsometry, Space,
};
use crate::metric::FiniteMetricSpace;
use crate::rat::{Rat, RatInf};

/// The constraint `θ_0` a run must strictly refine.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialConstraint {
    /// All-∞.
    Empty,
    /// `ψ_f + slack` for the correspondence `pairs`.
    Coarsened {
        pairs: Vec<(usize, usize)>,
        slack: Rat,
    },
    /// A matrix on all left points against the right points `cols`,
    /// extended to the rest of the right side by `min_w ψ(x, w) + d(w, y)`.
    Matrix {
        cols: Vec<usize>,
        psi: ApproxIsometry,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Forth,
    Back,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub side: Side,
    /// The point that had to be covered, or `None` when its side was exhausted.
    pub point: Option<usize>,
    pub pair: Option<(usize, usize)>,
    pub c: Rat,
    pub delta: Rat,
}

/// Outcome of a run: the correspondence, per-step bookkeeping, and the
/// decreasing chain `θ_0 ≥ θ_1 ≥ …` restricted to the touched points.
#[derive(Debug, Clone)]
pub struct BackForthState {
    pub pairs: Vec<(usize, usize)>,
    pub steps: Vec<StepRecord>,
    /// Left and right points the matrices are indexed by.
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub theta_chain: Vec<ApproxIsometry>,
    /// Half the distortion of the final correspondence.
    pub c: Rat,
    /// Final slack; `None` while still all-∞.
    pub delta: Option<Rat>,
}

impl BackForthState {
    pub fn theta(&self) -> &ApproxIsometry {
        self.theta_chain.last().expect("chain starts with θ_0")
    }

    /// `c + δ`: every paired point is within this of its partner under `θ`.
    pub fn r(&self) -> RatInf {
        self.delta.map_or(RatInf::Inf, |d| RatInf::Fin(self.c + d))
    }

    fn row_positions(&self, points: &[usize]) -> Option<Vec<usize>> {
        points
            .iter()
            .map(|p| self.rows.iter().position(|x| x == p))
            .collect()
    }

    fn col_positions(&self, points: &[usize]) -> Option<Vec<usize>> {
        points
            .iter()
            .map(|p| self.cols.iter().position(|x| x == p))
            .collect()
    }

    /// Whether `θ` is `r`-total on the left points and `r`-surjective on the
    /// right points, recomputed from the final matrix.
    pub fn r_bijective_on(&self, left: &[usize], right: &[usize], r: Rat) -> bool {
        match (self.row_positions(left), self.col_positions(right)) {
            (Some(l), Some(rr)) => {
                r_total(self.theta(), r, &l) && r_surjective(self.theta(), r, &rr)
            }
            _ => false,
        }
    }
}

fn half_distortion<L: MetricPoints + ?Sized, R: MetricPoints + ?Sized>(
    l: &L,
    r: &R,
    pairs: &[(usize, usize)],
) -> Rat {
    let mut worst = Rat::ZERO;
    for (i, &(x, y)) in pairs.iter().enumerate() {
        for &(x2, y2) in &pairs[..i] {
            worst = worst.max((l.distance(x, x2) - r.distance(y, y2)).abs());
        }
    }
    worst / Rat::int(2)
}

fn psi_r<L: MetricPoints + ?Sized, R: MetricPoints + ?Sized>(
    l: &L,
    r: &R,
    pairs: &[(usize, usize)],
    shift: Rat,
    x: usize,
    y: usize,
) -> RatInf {
    pairs
        .iter()
        .map(|&(xk, yk)| RatInf::Fin(l.distance(x, xk) + shift + r.distance(yk, y)))
        .min()
        .unwrap_or(RatInf::Inf)
}

fn initial_value<L: MetricPoints + ?Sized, R: MetricPoints + ?Sized>(
    l: &L,
    r: &R,
    init: &InitialConstraint,
    x: usize,
    y: usize,
) -> RatInf {
    match init {
        InitialConstraint::Empty => RatInf::Inf,
        InitialConstraint::Coarsened { pairs, slack } => {
            psi_r(l, r, pairs, half_distortion(l, r, pairs) + *slack, x, y)
        }
        InitialConstraint::Matrix { cols, psi } => cols
            .iter()
            .enumerate()
            .map(|(w, &yw)| psi.get(x, w) + r.distance(yw, y))
            .min()
            .unwrap_or(RatInf::Inf),
    }
}

fn subspace_of<M: MetricPoints + ?Sized>(m: &M, points: &[usize], label: char) -> Space {
    let rows: Vec<Vec<Rat>> = points
        .iter()
        .map(|&p| points.iter().map(|&q| m.distance(p, q)).collect())
        .collect();
    let labels = points.iter().map(|p| format!("{}{}", label, p)).collect();
    alloc::sync::Arc::new(FiniteMetricSpace::new(labels, &rows).expect("distinct points"))
}

struct Run<'a, L: ?Sized, R: ?Sized> {
    l: &'a L,
    r: &'a R,
    init: &'a InitialConstraint,
    pairs: Vec<(usize, usize)>,
    c: Rat,
    delta: Option<Rat>,
    rows: Vec<usize>,
    cols: Vec<usize>,
    /// `(pairs.len(), c + δ)` for each θ_n, n ≥ 1.
    history: Vec<(usize, Rat)>,
    reserve: Rat,
}

impl<'a, L: MetricPoints + ?Sized, R: MetricPoints + ?Sized> Run<'a, L, R> {
    fn theta_at(&self, n: usize, x: usize, y: usize) -> RatInf {
        if n == 0 {
            return initial_value(self.l, self.r, self.init, x, y);
        }
        let (k, shift) = self.history[n - 1];
        psi_r(self.l, self.r, &self.pairs[..k], shift, x, y)
    }

    fn bound(&self) -> Option<Rat> {
        self.delta.map(|d| self.c + d)
    }

    /// Candidate `(x, y)` with its new half-distortion and slack, if it keeps
    /// the chain strictly decreasing on the touched points.
    fn try_pair(&self, x: usize, y: usize, c_new: Rat, step: usize) -> Option<Rat> {
        let cap = Rat::new(1, 1i128 << (step + 1).min(100));
        let delta = match self.bound() {
            Some(b) => {
                let room = b - c_new;
                if !room.is_positive() {
                    return None;
                }
                cap.min(room / Rat::int(2))
            }
            None => cap,
        };
        let mut pairs = self.pairs.clone();
        if !pairs.contains(&(x, y)) {
            pairs.push((x, y));
        }
        let mut rows = self.rows.clone();
        if !rows.contains(&x) {
            rows.push(x);
        }
        let mut cols = self.cols.clone();
        if !cols.contains(&y) {
            cols.push(y);
        }
        let n = self.history.len();
        if n == 0 && matches!(self.init, InitialConstraint::Matrix { .. }) {
            // Later steps shrink every term; only the first must be checked
            // against the matrix everywhere.
            rows = (0..self.l.point_count()).collect();
            cols = (0..self.r.point_count()).collect();
        }
        for &a in &rows {
            for &b in &cols {
                let new = psi_r(self.l, self.r, &pairs, c_new + delta, a, b);
                let old = self.theta_at(n, a, b);
                match old.margin_over(new) {
                    Some(m) if m > RatInf::Fin(Rat::ZERO) => {}
                    _ => return None,
                }
            }
        }
        Some(delta)
    }

    fn accept(&mut self, pair: Option<(usize, usize)>, c_new: Rat, delta: Rat) {
        if let Some((x, y)) = pair {
            if !self.pairs.contains(&(x, y)) {
                self.pairs.push((x, y));
            }
            if !self.rows.contains(&x) {
                self.rows.push(x);
            }
            if !self.cols.contains(&y) {
                self.cols.push(y);
            }
        }
        self.c = c_new;
        self.delta = Some(delta);
        self.history.push((self.pairs.len(), c_new + delta));
    }

    /// Covers the point on its side by the partner of least distortion,
    /// ties to the smaller index.
    fn step(
        &mut self,
        side: Side,
        point: Option<usize>,
        step: usize,
    ) -> Result<StepRecord, EngineError> {
        let fail = || EngineError::StepInfeasible {
            step,
            prefix: self.pairs.len(),
        };
        let Some(p) = point else {
            // Nothing left to cover on this side: only tighten the slack.
            let c_new = self.c.max(self.reserve);
            let delta = self.try_pair_none(c_new, step).ok_or_else(fail)?;
            self.accept(None, c_new, delta);
            return Ok(StepRecord {
                side,
                point,
                pair: None,
                c: self.c,
                delta,
            });
        };
        let other = match side {
            Side::Forth => self.r.point_count(),
            Side::Back => self.l.point_count(),
        };
        let mut cands: Vec<(Rat, Rat, usize)> = (0..other)
            .map(|q| {
                let (x, y) = match side {
                    Side::Forth => (p, q),
                    Side::Back => (q, p),
                };
                let worst = self
                    .pairs
                    .iter()
                    .map(|&(xk, yk)| {
                        (self.l.distance(x, xk) - self.r.distance(y, yk)).abs() / Rat::int(2)
                    })
                    .max()
                    .unwrap_or(Rat::ZERO);
                (worst.max(self.c).max(self.reserve), worst, q)
            })
            .collect();
        cands.sort();
        for (c_new, _, q) in cands {
            if self.bound().is_some_and(|b| c_new >= b) {
                break;
            }
            let pair = match side {
                Side::Forth => (p, q),
                Side::Back => (q, p),
            };
            if let Some(delta) = self.try_pair(pair.0, pair.1, c_new, step) {
                self.accept(Some(pair), c_new, delta);
                return Ok(StepRecord {
                    side,
                    point,
                    pair: Some(pair),
                    c: c_new,
                    delta,
                });
            }
        }
        Err(fail())
    }

    fn try_pair_none(&self, c_new: Rat, step: usize) -> Option<Rat> {
        let cap = Rat::new(1, 1i128 << (step + 1).min(100));
        let b = self.bound()?;
        let room = b - c_new;
        room.is_positive().then(|| cap.min(room / Rat::int(2)))
    }
}

/// Alternates forth (cover the next uncovered left point) and back (the next
/// uncovered right point) for `steps` steps, starting from `init`.
///
/// `reserve` is a floor for the half-distortion `c` claimed by `θ`: a run
/// that reserves `c` up front may later accept partners of distortion up
/// to `2c` without shrinking the slack.
pub fn back_and_forth<L: MetricPoints + ?Sized, R: MetricPoints + ?Sized>(
    left: &L,
    right: &R,
    init: &InitialConstraint,
    steps: usize,
    reserve: Rat,
) -> Result<BackForthState, EngineError> {
    run(left, right, init, steps, reserve, false)
}

fn run<L: MetricPoints + ?Sized, R: MetricPoints + ?Sized>(
    left: &L,
    right: &R,
    init: &InitialConstraint,
    steps: usize,
    reserve: Rat,
    forth_only: bool,
) -> Result<BackForthState, EngineError> {
    let (pairs, c, delta) = match init {
        InitialConstraint::Coarsened { pairs, slack } => {
            if !slack.is_positive() {
                return Err(EngineError::Invalid(
                    "initial slack must be positive".into(),
                ));
            }
            (
                pairs.clone(),
                half_distortion(left, right, pairs),
                Some(*slack),
            )
        }
        InitialConstraint::Matrix { cols, psi } => {
            if psi.rows_len() != left.point_count() || psi.cols_len() != cols.len() {
                return Err(EngineError::Invalid(
                    "initial matrix shape does not match".into(),
                ));
            }
            (Vec::new(), Rat::ZERO, None)
        }
        InitialConstraint::Empty => (Vec::new(), Rat::ZERO, None),
    };
    let mut rows: Vec<usize> = Vec::new();
    let mut cols: Vec<usize> = Vec::new();
    for &(x, y) in &pairs {
        if !rows.contains(&x) {
            rows.push(x);
        }
        if !cols.contains(&y) {
            cols.push(y);
        }
    }
    if let InitialConstraint::Matrix { cols: c0, .. } = init {
        for &y in c0 {
            if !cols.contains(&y) {
                cols.push(y);
            }
        }
    }
    let mut run = Run {
        l: left,
        r: right,
        init,
        pairs,
        c,
        delta,
        rows,
        cols,
        history: Vec::new(),
        reserve,
    };
    let mut records = Vec::with_capacity(steps);
    for step in 0..steps {
        let side = if forth_only || step % 2 == 0 {
            Side::Forth
        } else {
            Side::Back
        };
        let point = match side {
            Side::Forth => (0..left.point_count()).find(|x| !run.pairs.iter().any(|p| p.0 == *x)),
            Side::Back => (0..right.point_count()).find(|y| !run.pairs.iter().any(|p| p.1 == *y)),
        };
        records.push(run.step(side, point, step)?);
    }

    let rs = subspace_of(left, &run.rows, 'x');
    let cs = subspace_of(right, &run.cols, 'y');
    let chain: Vec<ApproxIsometry> = (0..=run.history.len())
        .map(|n| {
            ApproxIsometry::from_fn(rs.clone(), cs.clone(), |i, j| {
                run.theta_at(n, run.rows[i], run.cols[j])
            })
        })
        .collect();
    for (n, theta) in chain.iter().enumerate() {
        theta.validate()?;
        if n > 0 && strictly_refines(theta, &chain[n - 1])?.is_none() {
            return Err(EngineError::StepInfeasible {
                step: n - 1,
                prefix: run.history[n - 1].0,
            });
        }
    }
    limit_of_decreasing(&chain)?;
    Ok(BackForthState {
        pairs: run.pairs,
        steps: records,
        rows: run.rows,
        cols: run.cols,
        theta_chain: chain,
        c: run.c,
        delta: run.delta,
    })
}

/// Forth-only run covering every point of `b` inside `m` below `ψ`.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub map: Vec<(usize, usize)>,
    /// `max |d(b, b′) − d(fb, fb′)|`.
    pub distortion: Rat,
    pub state: BackForthState,
}

pub fn embed_into_limit<M: MetricPoints + ?Sized>(
    b: &FiniteMetricSpace,
    m: &M,
    psi: &InitialConstraint,
    reserve: Rat,
) -> Result<Embedding, EngineError> {
    let steps = b.len();
    let state = run(b, m, psi, steps, reserve, true)?;
    let mut map = state.pairs.clone();
    map.sort();
    Ok(Embedding {
        distortion: state.c * Rat::int(2),
        map,
        state,
    })
}

/// Steps needed for resolution `ε`: `2 + ⌈log₂(1/ε)⌉`.
pub fn steps_for(eps: Rat) -> usize {
    let mut k = 0;
    let mut p = Rat::ONE;
    while p > eps {
        p = p / Rat::int(2);
        k += 1;
    }
    2 + k
}

#[derive(Debug, Clone)]
pub struct HomogeneityReport {
    pub state: BackForthState,
    pub r: RatInf,
    pub success: bool,
}

/// Extends a partial isometry `f: M ⇢ M` by back-and-forth from `ψ_f + ε`,
/// reserving half-distortion `ε/2`; succeeds when the result is
/// `r`-bijective on the covered points with `r ≤ ε`.
pub fn homogeneity_check<M: MetricPoints + ?Sized>(
    m: &M,
    f: &[(usize, usize)],
    eps: Rat,
    steps: Option<usize>,
) -> Result<HomogeneityReport, EngineError> {
    if !eps.is_positive() {
        return Err(EngineError::Invalid("ε must be positive".into()));
    }
    for (i, &(x, y)) in f.iter().enumerate() {
        if x >= m.point_count() || y >= m.point_count() {
            return Err(EngineError::Invalid(format!(
                "point {} out of range",
                x.max(y)
            )));
        }
        for &(x2, y2) in &f[..i] {
            if (x == x2) != (y == y2) || m.distance(x, x2) != m.distance(y, y2) {
                return Err(EngineError::Invalid(format!(
                    "pairs ({}, {}) and ({}, {}) are not isometric",
                    x2, y2, x, y
                )));
            }
        }
    }
    let init = InitialConstraint::Coarsened {
        pairs: f.to_vec(),
        slack: eps,
    };
    let state = back_and_forth(
        m,
        m,
        &init,
        steps.unwrap_or_else(|| steps_for(eps)),
        eps / Rat::int(2),
    )?;
    let r = state.r();
    let left: Vec<usize> = state.pairs.iter().map(|p| p.0).collect();
    let right: Vec<usize> = state.pairs.iter().map(|p| p.1).collect();
    let success = r <= RatInf::Fin(eps)
        && r.finite()
            .is_some_and(|r| state.r_bijective_on(&left, &right, r));
    Ok(HomogeneityReport { state, r, success })
}
