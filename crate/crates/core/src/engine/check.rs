//! The one-point extension test for finite approximations of metric limits.

use alloc::vec;
use alloc::vec::Vec;

use super::{ClassProvider, LimitApproximation, TaskStatus};
use crate::metric::FiniteMetricSpace;
use crate::rat::{Rat, RatInf};

/// Read access to the distances of a finite metric structure.
pub trait MetricPoints {
    fn point_count(&self) -> usize;
    fn distance(&self, p: usize, q: usize) -> Rat;
}

impl MetricPoints for FiniteMetricSpace {
    fn point_count(&self) -> usize {
        self.len()
    }

    fn distance(&self, p: usize, q: usize) -> Rat {
        self.dist(p, q)
    }
}

impl MetricPoints for super::urysohn::GridStage {
    fn point_count(&self) -> usize {
        self.len()
    }

    fn distance(&self, p: usize, q: usize) -> Rat {
        self.dist(p, q)
    }
}

/// A one-point extension `S → grid` together with the best realization found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionWitness {
    pub subset: Vec<usize>,
    pub values: Vec<Rat>,
    /// Closest point and its error `max_s |d(x, s) − f(s)|`.
    pub point: Option<usize>,
    pub error: RatInf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionReport {
    pub subsets: usize,
    pub checked: usize,
    pub passed: usize,
    pub failures: Vec<ExtensionWitness>,
    pub worst: Option<ExtensionWitness>,
}

impl ExtensionReport {
    pub fn failed(&self) -> usize {
        self.failures.len()
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

fn subsets_up_to(n: usize, s: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..s {
        let mut next = Vec::new();
        for set in &frontier {
            let start = set.last().map_or(0, |&l: &usize| l + 1);
            for p in start..n {
                let mut t = set.clone();
                t.push(p);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Katětov functions on `subset` with values in `{0, g, …} ∩ [0, cap]`.
fn grid_katetov<M: MetricPoints + ?Sized>(
    space: &M,
    subset: &[usize],
    grid: Rat,
    cap: Rat,
) -> Vec<Vec<Rat>> {
    let values: Vec<Rat> = (0..)
        .map(|k| grid * Rat::int(k))
        .take_while(|&v| v <= cap)
        .collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(subset.len());
    fn rec<M: MetricPoints + ?Sized>(
        space: &M,
        subset: &[usize],
        values: &[Rat],
        cur: &mut Vec<Rat>,
        out: &mut Vec<Vec<Rat>>,
    ) {
        let i = cur.len();
        if i == subset.len() {
            out.push(cur.clone());
            return;
        }
        for &v in values {
            let ok = (0..i).all(|k| {
                let d = space.distance(subset[i], subset[k]);
                (v - cur[k]).abs() <= d && d <= v + cur[k]
            });
            if ok {
                cur.push(v);
                rec(space, subset, values, cur, out);
                cur.pop();
            }
        }
    }
    rec(space, subset, &values, &mut cur, &mut out);
    out
}

/// For every `S ⊆ {0, …, prefix−1}` with `|S| ≤ s` and every grid Katětov
/// function `f` on `S` bounded by `cap`, looks for a point `x` with
/// `|d(x, p) − f(p)| ≤ ε` on `S`.
pub fn check_extension_property<M: MetricPoints + ?Sized>(
    space: &M,
    prefix: usize,
    s: usize,
    grid: Rat,
    cap: Rat,
    eps: Rat,
) -> ExtensionReport {
    let prefix = prefix.min(space.point_count());
    let sets = subsets_up_to(prefix, s);
    let mut report = ExtensionReport {
        subsets: sets.len(),
        checked: 0,
        passed: 0,
        failures: Vec::new(),
        worst: None,
    };
    for set in &sets {
        for values in grid_katetov(space, set, grid, cap) {
            report.checked += 1;
            let mut best: (RatInf, Option<usize>) = (RatInf::Inf, None);
            for x in 0..space.point_count() {
                let err = set
                    .iter()
                    .zip(&values)
                    .map(|(&p, &v)| (space.distance(x, p) - v).abs())
                    .max()
                    .unwrap_or(Rat::ZERO);
                if RatInf::Fin(err) < best.0 {
                    best = (RatInf::Fin(err), Some(x));
                    if err.is_zero() {
                        break;
                    }
                }
            }
            let w = ExtensionWitness {
                subset: set.clone(),
                values,
                point: best.1,
                error: best.0,
            };
            if report.worst.as_ref().is_none_or(|cur| w.error > cur.error) {
                report.worst = Some(w.clone());
            }
            if w.error <= RatInf::Fin(eps) {
                report.passed += 1;
            } else {
                report.failures.push(w);
            }
        }
    }
    report
}

/// The scheduled one-point task over `a_{<m}` that covers a failed
/// extension: its target is the least Katětov extension of `f` to the
/// prefix, capped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringTask {
    pub m: usize,
    pub target: Vec<Rat>,
    /// Satisfied certificate entry for it, if any.
    pub entry: Option<usize>,
}

pub fn covering_task<P>(
    provider: &P,
    limit: &LimitApproximation<P>,
    failure: &ExtensionWitness,
    m: usize,
) -> CoveringTask
where
    P: ClassProvider,
{
    let cap = limit.params.cap;
    let prefix = &limit.dense[..m.min(limit.dense.len())];
    let target: Vec<Rat> = prefix
        .iter()
        .map(|a| {
            failure
                .subset
                .iter()
                .zip(&failure.values)
                .map(|(&s, &v)| v + provider.distance(&limit.space, &limit.dense[s], a))
                .min()
                .unwrap_or(cap)
                .min(cap)
        })
        .collect();
    let entry = limit.entries.iter().position(|e| {
        e.task.n == 1
            && e.task.m == prefix.len()
            && matches!(e.status, TaskStatus::Satisfied { .. })
            && e.task.target.as_ref().is_some_and(|f| {
                f.row(0)
                    .iter()
                    .zip(&target)
                    .all(|(x, &y)| *x == RatInf::Fin(y))
            })
    });
    CoveringTask {
        m: prefix.len(),
        target,
        entry,
    }
}
