//! Random valid instances for property tests and benchmarks.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::apx::{ApproxIsometry, PartialIsometry, Space};
use crate::banach::{PolytopalNormSpace, VectorTuple};
use crate::metric::FiniteMetricSpace;
use crate::rat::{Rat, RatInf};

/// A metric on `n` points with distances in `(0, max_units/den]`: random edge
/// weights closed under shortest paths.
pub fn random_metric<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    den: i128,
    max_units: i128,
) -> FiniteMetricSpace {
    assert!(max_units >= 1);
    let mut d = vec![0i128; n * n];
    for p in 0..n {
        for q in p + 1..n {
            let w = rng.gen_range(1..=max_units);
            d[p * n + q] = w;
            d[q * n + p] = w;
        }
    }
    for k in 0..n {
        for p in 0..n {
            for q in 0..n {
                let via = d[p * n + k] + d[k * n + q];
                if via < d[p * n + q] {
                    d[p * n + q] = via;
                }
            }
        }
    }
    let labels = (0..n).map(|i| alloc::format!("p{}", i)).collect();
    FiniteMetricSpace::from_units(labels, den, d)
}

/// A bi-Katětov matrix `min_k d(x, x_k) + c_k + d(y_k, y)` over a few random
/// anchor pairs; with probability `1/10` (or when a side is empty) all-∞.
pub fn random_apx<R: Rng + ?Sized>(rng: &mut R, x: &Space, y: &Space, den: i128) -> ApproxIsometry {
    if x.is_empty() || y.is_empty() || rng.gen_ratio(1, 10) {
        return ApproxIsometry::empty(x.clone(), y.clone());
    }
    let k = rng.gen_range(1..=3usize);
    let anchors: Vec<(usize, usize)> = (0..k)
        .map(|_| (rng.gen_range(0..x.len()), rng.gen_range(0..y.len())))
        .collect();
    let costs: Vec<Rat> = anchors
        .iter()
        .map(|&(xk, yk)| {
            let need = anchors
                .iter()
                .map(|&(xl, yl)| (x.dist(xk, xl) - y.dist(yk, yl)).abs())
                .max()
                .unwrap_or(Rat::ZERO);
            let base = Rat::new(rng.gen_range(0..=2 * den), den);
            base.max(need / Rat::int(2))
        })
        .collect();
    let (xs, ys) = (x.clone(), y.clone());
    ApproxIsometry::from_fn(x.clone(), y.clone(), |a, b| {
        anchors
            .iter()
            .zip(&costs)
            .map(|(&(xk, yk), &c)| RatInf::Fin(xs.dist(a, xk) + c + ys.dist(yk, b)))
            .min()
            .unwrap_or(RatInf::Inf)
    })
}

/// Randomized backtracking for a partial isometry `X ⇢ Y` whose domain is
/// `must` plus up to `extra` further random points. `None` when `must` has
/// no isometric image.
pub fn random_partial_isometry<R: Rng + ?Sized>(
    rng: &mut R,
    x: &Space,
    y: &Space,
    must: &[usize],
    extra: usize,
) -> Option<PartialIsometry> {
    let mut others: Vec<usize> = (0..x.len()).filter(|p| !must.contains(p)).collect();
    others.shuffle(rng);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    if !assign(rng, x, y, must, &mut pairs) {
        return None;
    }
    let mut added = 0;
    for p in others {
        if added == extra {
            break;
        }
        let mut cands: Vec<usize> = (0..y.len())
            .filter(|&q| consistent(x, y, &pairs, p, q))
            .collect();
        cands.shuffle(rng);
        if let Some(&q) = cands.first() {
            pairs.push((p, q));
            added += 1;
        }
    }
    Some(PartialIsometry::new(x.clone(), y.clone(), &pairs).expect("constructed isometric"))
}

fn consistent(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    pairs: &[(usize, usize)],
    p: usize,
    q: usize,
) -> bool {
    pairs
        .iter()
        .all(|&(a, b)| a != p && b != q && x.dist(a, p) == y.dist(b, q))
}

fn assign<R: Rng + ?Sized>(
    rng: &mut R,
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    todo: &[usize],
    pairs: &mut Vec<(usize, usize)>,
) -> bool {
    let Some((&p, rest)) = todo.split_first() else {
        return true;
    };
    let mut cands: Vec<usize> = (0..y.len())
        .filter(|&q| consistent(x, y, pairs, p, q))
        .collect();
    cands.shuffle(rng);
    for q in cands {
        pairs.push((p, q));
        if assign(rng, x, y, rest, pairs) {
            return true;
        }
        pairs.pop();
    }
    false
}

/// A polytopal norm on `R^dim` from `pairs` random covectors (and their
/// negatives) with entries in `{-den, …, den}/den`, resampled until they span.
pub fn random_polytopal<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    pairs: usize,
    den: i128,
) -> PolytopalNormSpace {
    assert!(pairs >= dim && dim >= 1);
    loop {
        let half: Vec<Vec<Rat>> = (0..pairs)
            .map(|_| {
                (0..dim)
                    .map(|_| Rat::new(rng.gen_range(-den..=den), den))
                    .collect()
            })
            .collect();
        if let Ok(space) = PolytopalNormSpace::symmetric(dim, &half) {
            return space;
        }
    }
}

/// `n` vectors with entries in `{-den, …, den}/den`.
pub fn random_vector_tuple<R: Rng + ?Sized>(
    rng: &mut R,
    space: &PolytopalNormSpace,
    n: usize,
    den: i128,
) -> VectorTuple {
    let vectors = (0..n)
        .map(|_| {
            (0..space.dim())
                .map(|_| Rat::new(rng.gen_range(-den..=den), den))
                .collect()
        })
        .collect();
    VectorTuple::new(space.clone(), vectors).expect("dimensions match")
}

/// Shorthand for wrapping a fresh space.
pub fn shared(space: FiniteMetricSpace) -> Space {
    Arc::new(space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_instances_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(0..=6);
            let m = rng.gen_range(0..=6);
            let x = shared(random_metric(&mut rng, n, 4, 6));
            let y = shared(random_metric(&mut rng, m, 4, 6));
            assert!(x.validate().is_ok());
            let psi = random_apx(&mut rng, &x, &y, 4);
            assert!(psi.validate().is_ok(), "{:?}", psi);
            if let Some(f) = random_partial_isometry(&mut rng, &x, &y, &[], 3) {
                assert!(PartialIsometry::new(x.clone(), y.clone(), f.pairs()).is_ok());
            }
        }
    }
}
