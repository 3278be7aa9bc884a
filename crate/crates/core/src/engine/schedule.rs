//! Task enumeration: every grid bi-Katětov constraint between a tuple and a
//! chain prefix, dovetailed by size.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;

use super::{Bounds, ClassProvider, EngineError, Task};
use crate::apx::{ApproxIsometry, Space};
use crate::rat::{Rat, RatInf};

/// All bi-Katětov matrices `X ⇝ Y` with entries in `{0, g, 2g, …} ∩ [0, cap]`.
pub fn enumerate_grid_apx(x: &Space, y: &Space, grid: Rat, cap: Rat) -> Vec<ApproxIsometry> {
    let (n, m) = (x.len(), y.len());
    let scale = [x.scale(), y.scale(), grid.denom(), cap.denom()]
        .iter()
        .fold(1i128, |a, b| a.lcm(b));
    let to_units = |r: Rat| (r * Rat::int(scale)).numer();
    let step = to_units(grid);
    let top = to_units(cap);
    let dx: Vec<i128> = (0..n * n).map(|k| to_units(x.dist(k / n, k % n))).collect();
    let dy: Vec<i128> = (0..m * m).map(|k| to_units(y.dist(k / m, k % m))).collect();
    let values: Vec<i128> = (0..).map(|k| k * step).take_while(|&v| v <= top).collect();

    let mut out = Vec::new();
    let mut cells = vec![0i128; n * m];
    fn ok(a: i128, b: i128, d: i128) -> bool {
        (a - b).abs() <= d && d <= a + b
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        k: usize,
        n: usize,
        m: usize,
        cells: &mut Vec<i128>,
        values: &[i128],
        dx: &[i128],
        dy: &[i128],
        emit: &mut dyn FnMut(&[i128]),
    ) {
        if k == n * m {
            emit(cells);
            return;
        }
        let (i, j) = (k / m, k % m);
        for &v in values {
            let row_ok = (0..j).all(|j2| ok(v, cells[i * m + j2], dy[j * m + j2]));
            let col_ok = (0..i).all(|i2| ok(v, cells[i2 * m + j], dx[i * n + i2]));
            if row_ok && col_ok {
                cells[k] = v;
                rec(k + 1, n, m, cells, values, dx, dy, emit);
            }
        }
    }
    rec(
        0,
        n,
        m,
        &mut cells,
        &values,
        &dx,
        &dy,
        &mut |c: &[i128]| {
            out.push(ApproxIsometry::from_fn(x.clone(), y.clone(), |i, j| {
                RatInf::Fin(Rat::new(c[i * m + j], scale))
            }))
        },
    );
    out
}

fn sort_key<T>(t: &Task<T>) -> (u64, usize, usize, Vec<RatInf>) {
    (t.size(), t.n, t.tuple_index, t.psi.values().to_vec())
}

/// Tasks with `n + m = level` over the current prefix, in dovetailed order.
pub fn schedule_level<P: ClassProvider>(
    provider: &P,
    stage: &P::Structure,
    prefix: &[P::Point],
    tuples: &[Vec<P::Tuple>],
    bounds: &Bounds,
    level: usize,
) -> Result<Vec<Task<P::Tuple>>, EngineError> {
    let (grid, cap) = provider.constraint_grid();
    if !grid.is_positive() || cap.is_negative() {
        return Err(EngineError::EmptyBounds);
    }
    let mut tasks = Vec::new();
    for n in 1..=bounds.max_n.min(level) {
        let m = level - n;
        if !bounds.admits(n, m) || m > prefix.len() {
            continue;
        }
        let pm: Space = Arc::new(provider.points_metric(stage, &prefix[..m], 'a'));
        for (ti, t) in tuples
            .get(n)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
            .iter()
            .enumerate()
        {
            let ts: Space = Arc::new(provider.tuple_space(t));
            for f in enumerate_grid_apx(&ts, &pm, grid, cap) {
                tasks.push(Task::scheduled(t.clone(), ti, f, bounds.eps)?);
            }
        }
    }
    tasks.sort_by_cached_key(sort_key);
    Ok(tasks)
}

/// Every task within the bounds over a fixed prefix, in dovetailed order.
pub fn schedule_tasks<P: ClassProvider>(
    provider: &P,
    stage: &P::Structure,
    prefix: &[P::Point],
    bounds: &Bounds,
) -> Result<Vec<Task<P::Tuple>>, EngineError> {
    let tuples: Vec<Vec<P::Tuple>> = (0..=bounds.max_n)
        .map(|n| provider.enumerate_dense(n, bounds.tuple_budget))
        .collect();
    let mut all = Vec::new();
    for level in 1..=bounds.max_level() {
        all.extend(schedule_level(
            provider, stage, prefix, &tuples, bounds, level,
        )?);
    }
    Ok(all)
}
