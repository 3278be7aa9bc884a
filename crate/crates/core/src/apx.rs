//! Approximate isometries: bi-Katětov matrices `ψ: X × Y → [0, ∞]`.
//!
//! Composition is min-plus, the pseudo-inverse is the transpose and the order
//! is pointwise. Spaces are shared through `Arc` so compositions and
//! restrictions do not copy distance matrices.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::metric::{FiniteMetricSpace, MetricError, PointTuple};
use crate::rat::{Rat, RatInf};

pub type Space = Arc<FiniteMetricSpace>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// A row section `ψ(x, ·)`: the source point is fixed.
    Row,
    /// A column section `ψ(·, y)`: the target point is fixed.
    Column,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ApxError {
    #[error("value matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    Shape {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("Katetov violation in {axis:?} section {fixed} at pair {pair:?}")]
    KatetovViolation {
        axis: Axis,
        fixed: usize,
        pair: (usize, usize),
    },
    #[error("spaces do not match")]
    SpaceMismatch,
    #[error("pairs {0:?} and {1:?} are not distance-preserving")]
    NotIsometric((usize, usize), (usize, usize)),
    #[error("source point {0} is mapped twice")]
    NotFunction(usize),
    #[error("{0:?} embedding is not isometric")]
    NotIsometricEmbedding(Axis),
    #[error("negative epsilon")]
    NegativeEpsilon,
    #[error("empty list")]
    EmptyList,
    #[error("chain element {0} is not below its predecessor")]
    NotDecreasing(usize),
    #[error("not {0}-bijective")]
    NotDeltaBijective(Rat),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KatetovError {
    #[error("function has {len} values for {expected} points")]
    LengthMismatch { len: usize, expected: usize },
    #[error("Katetov inequality fails at ({0}, {1})")]
    Violation(usize, usize),
}

fn same_space(a: &Space, b: &Space) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Checks both Katětov inequalities, including `f(p) ≥ 0` via the pair `(p, p)`.
pub fn is_katetov(f: &[RatInf], x: &FiniteMetricSpace) -> Result<(), KatetovError> {
    if f.len() != x.len() {
        return Err(KatetovError::LengthMismatch {
            len: f.len(),
            expected: x.len(),
        });
    }
    for p in 0..f.len() {
        for q in p..f.len() {
            let d = x.dist(p, q);
            if !katetov_pair(f[p], f[q], d) {
                return Err(KatetovError::Violation(p, q));
            }
        }
    }
    Ok(())
}

#[inline]
fn katetov_pair(a: RatInf, b: RatInf, d: Rat) -> bool {
    match (a, b) {
        (RatInf::Inf, RatInf::Inf) => true,
        (RatInf::Fin(a), RatInf::Fin(b)) => (a - b).abs() <= d && d <= a + b,
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApproxIsometry {
    source: Space,
    target: Space,
    values: Vec<RatInf>,
}

/// Validates a value matrix as an approximate isometry `X ⇝ Y`.
pub fn validate_apx(rows: &[Vec<RatInf>], x: Space, y: Space) -> Result<ApproxIsometry, ApxError> {
    let bad_shape = || ApxError::Shape {
        rows: rows.len(),
        cols: rows.first().map_or(0, |r| r.len()),
        expected_rows: x.len(),
        expected_cols: y.len(),
    };
    if rows.len() != x.len() || rows.iter().any(|r| r.len() != y.len()) {
        return Err(bad_shape());
    }
    let psi = ApproxIsometry {
        values: rows.iter().flatten().copied().collect(),
        source: x,
        target: y,
    };
    psi.validate()?;
    Ok(psi)
}

impl ApproxIsometry {
    /// Builds without checking; callers must know the result is bi-Katětov.
    pub fn from_fn(
        source: Space,
        target: Space,
        mut f: impl FnMut(usize, usize) -> RatInf,
    ) -> Self {
        let (n, m) = (source.len(), target.len());
        let mut values = Vec::with_capacity(n * m);
        for x in 0..n {
            for y in 0..m {
                values.push(f(x, y));
            }
        }
        ApproxIsometry {
            source,
            target,
            values,
        }
    }

    /// `ψ_{id} = d_X`.
    pub fn identity(x: Space) -> Self {
        let s = x.clone();
        Self::from_fn(x, s.clone(), |a, b| RatInf::Fin(s.dist(a, b)))
    }

    /// The empty approximate isometry, constantly `∞`.
    pub fn empty(x: Space, y: Space) -> Self {
        Self::from_fn(x, y, |_, _| RatInf::Inf)
    }

    pub fn validate(&self) -> Result<(), ApxError> {
        let (n, m) = (self.source.len(), self.target.len());
        let mut buf = Vec::with_capacity(n.max(m));
        for x in 0..n {
            buf.clear();
            buf.extend((0..m).map(|y| self.get(x, y)));
            if let Err(KatetovError::Violation(p, q)) = is_katetov(&buf, &self.target) {
                return Err(ApxError::KatetovViolation {
                    axis: Axis::Row,
                    fixed: x,
                    pair: (p, q),
                });
            }
        }
        for y in 0..m {
            buf.clear();
            buf.extend((0..n).map(|x| self.get(x, y)));
            if let Err(KatetovError::Violation(p, q)) = is_katetov(&buf, &self.source) {
                return Err(ApxError::KatetovViolation {
                    axis: Axis::Column,
                    fixed: y,
                    pair: (p, q),
                });
            }
        }
        Ok(())
    }

    pub fn source(&self) -> &Space {
        &self.source
    }

    pub fn target(&self) -> &Space {
        &self.target
    }

    pub fn rows_len(&self) -> usize {
        self.source.len()
    }

    pub fn cols_len(&self) -> usize {
        self.target.len()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> RatInf {
        self.values[x * self.target.len() + y]
    }

    pub fn row(&self, x: usize) -> &[RatInf] {
        let m = self.target.len();
        &self.values[x * m..(x + 1) * m]
    }

    pub fn rows(&self) -> Vec<Vec<RatInf>> {
        (0..self.rows_len()).map(|x| self.row(x).to_vec()).collect()
    }

    pub fn values(&self) -> &[RatInf] {
        &self.values
    }

    pub fn is_all_infinite(&self) -> bool {
        self.values.iter().all(|v| !v.is_finite())
    }

    pub fn is_all_finite(&self) -> bool {
        self.values.iter().all(RatInf::is_finite)
    }

    fn check_same_spaces(&self, other: &ApproxIsometry) -> Result<(), ApxError> {
        if same_space(&self.source, &other.source) && same_space(&self.target, &other.target) {
            Ok(())
        } else {
            Err(ApxError::SpaceMismatch)
        }
    }

    fn min_over_row(&self, x: usize) -> RatInf {
        self.row(x).iter().copied().min().unwrap_or(RatInf::Inf)
    }

    fn min_over_col(&self, y: usize) -> RatInf {
        (0..self.rows_len())
            .map(|x| self.get(x, y))
            .min()
            .unwrap_or(RatInf::Inf)
    }

    /// Largest finite entry, if any.
    pub fn max_finite(&self) -> Option<Rat> {
        self.values.iter().filter_map(RatInf::finite).max()
    }
}

/// `(φψ)(x, z) = min_y ψ(x, y) + φ(y, z)`.
pub fn compose(psi: &ApproxIsometry, phi: &ApproxIsometry) -> Result<ApproxIsometry, ApxError> {
    if !same_space(&psi.target, &phi.source) {
        return Err(ApxError::SpaceMismatch);
    }
    let ny = psi.cols_len();
    Ok(ApproxIsometry::from_fn(
        psi.source.clone(),
        phi.target.clone(),
        |x, z| {
            (0..ny)
                .map(|y| psi.get(x, y) + phi.get(y, z))
                .min()
                .unwrap_or(RatInf::Inf)
        },
    ))
}

/// `ψ*(y, x) = ψ(x, y)`.
pub fn pseudo_inverse(psi: &ApproxIsometry) -> ApproxIsometry {
    ApproxIsometry::from_fn(psi.target.clone(), psi.source.clone(), |y, x| psi.get(x, y))
}

/// A distance-preserving partial map `X ⇢ Y`, stored as sorted pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialIsometry {
    source: Space,
    target: Space,
    pairs: Vec<(usize, usize)>,
}

impl PartialIsometry {
    pub fn new(source: Space, target: Space, pairs: &[(usize, usize)]) -> Result<Self, ApxError> {
        let mut pairs = pairs.to_vec();
        pairs.sort_unstable();
        pairs.dedup();
        for &(x, y) in &pairs {
            if x >= source.len() {
                return Err(MetricError::IndexOutOfRange {
                    index: x,
                    len: source.len(),
                }
                .into());
            }
            if y >= target.len() {
                return Err(MetricError::IndexOutOfRange {
                    index: y,
                    len: target.len(),
                }
                .into());
            }
        }
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(ApxError::NotFunction(w[0].0));
        }
        for (i, &(x, y)) in pairs.iter().enumerate() {
            for &(x2, y2) in &pairs[i + 1..] {
                if source.dist(x, x2) != target.dist(y, y2) {
                    return Err(ApxError::NotIsometric((x, y), (x2, y2)));
                }
            }
        }
        Ok(PartialIsometry {
            source,
            target,
            pairs,
        })
    }

    pub fn identity_on(space: Space, subset: &[usize]) -> Result<Self, ApxError> {
        let pairs: Vec<_> = subset.iter().map(|&i| (i, i)).collect();
        Self::new(space.clone(), space, &pairs)
    }

    pub fn source(&self) -> &Space {
        &self.source
    }

    pub fn target(&self) -> &Space {
        &self.target
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn apply(&self, x: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == x).map(|p| p.1)
    }

    pub fn inverse(&self) -> PartialIsometry {
        let mut pairs: Vec<_> = self.pairs.iter().map(|&(x, y)| (y, x)).collect();
        pairs.sort_unstable();
        PartialIsometry {
            source: self.target.clone(),
            target: self.source.clone(),
            pairs,
        }
    }

    /// `g ∘ f`, defined where `f(x) ∈ dom g`.
    pub fn then(&self, g: &PartialIsometry) -> Result<PartialIsometry, ApxError> {
        if !same_space(&self.target, &g.source) {
            return Err(ApxError::SpaceMismatch);
        }
        let pairs: Vec<_> = self
            .pairs
            .iter()
            .filter_map(|&(x, y)| g.apply(y).map(|z| (x, z)))
            .collect();
        Ok(PartialIsometry {
            source: self.source.clone(),
            target: g.target.clone(),
            pairs,
        })
    }
}

/// `ψ_f(x, y) = min_{z ∈ dom f} d(x, z) + d(fz, y)`; all-∞ for empty `f`.
pub fn from_partial(f: &PartialIsometry) -> ApproxIsometry {
    let (xs, ys) = (f.source.clone(), f.target.clone());
    ApproxIsometry::from_fn(f.source.clone(), f.target.clone(), |x, y| {
        f.pairs
            .iter()
            .map(|&(z, fz)| RatInf::Fin(xs.dist(x, z) + ys.dist(fz, y)))
            .min()
            .unwrap_or(RatInf::Inf)
    })
}

fn check_embedding(
    small: &FiniteMetricSpace,
    big: &FiniteMetricSpace,
    map: &[usize],
    axis: Axis,
) -> Result<(), ApxError> {
    if map.len() != small.len() {
        return Err(ApxError::NotIsometricEmbedding(axis));
    }
    if let Some(&index) = map.iter().find(|&&i| i >= big.len()) {
        return Err(MetricError::IndexOutOfRange {
            index,
            len: big.len(),
        }
        .into());
    }
    for a in 0..map.len() {
        for b in a + 1..map.len() {
            if big.dist(map[a], map[b]) != small.dist(a, b) {
                return Err(ApxError::NotIsometricEmbedding(axis));
            }
        }
    }
    Ok(())
}

/// Extends `ψ: X ⇝ Y` along isometric embeddings `i: X → X′`, `j: Y → Y′`:
/// `(x′, y′) ↦ min_{x,y} d(x′, ix) + ψ(x, y) + d(jy, y′)`.
pub fn trivial_extension(
    psi: &ApproxIsometry,
    x_big: Space,
    y_big: Space,
    i: &[usize],
    j: &[usize],
) -> Result<ApproxIsometry, ApxError> {
    check_embedding(&psi.source, &x_big, i, Axis::Row)?;
    check_embedding(&psi.target, &y_big, j, Axis::Column)?;
    // Two passes of min-plus keep this O(|X′||X||Y′| + |X′||Y||Y′|)-ish.
    let (n, m) = (psi.rows_len(), psi.cols_len());
    let (xb, yb) = (x_big.clone(), y_big.clone());
    // left[x′][y] = min_x d(x′, ix) + ψ(x, y)
    let left: Vec<RatInf> = (0..xb.len())
        .flat_map(|xp| {
            let xb = &xb;
            (0..m).map(move |y| {
                (0..n)
                    .map(|x| psi.get(x, y) + xb.dist(xp, i[x]))
                    .min()
                    .unwrap_or(RatInf::Inf)
            })
        })
        .collect();
    Ok(ApproxIsometry::from_fn(x_big, y_big, |xp, yp| {
        (0..m)
            .map(|y| left[xp * m + y] + yb.dist(j[y], yp))
            .min()
            .unwrap_or(RatInf::Inf)
    }))
}

/// The minor on `rows × cols`, with the corresponding subspaces.
pub fn restrict(
    psi: &ApproxIsometry,
    rows: &[usize],
    cols: &[usize],
) -> Result<ApproxIsometry, ApxError> {
    let xs = Arc::new(psi.source.subspace(rows)?);
    let ys = Arc::new(psi.target.subspace(cols)?);
    Ok(ApproxIsometry::from_fn(xs, ys, |a, b| {
        psi.get(rows[a], cols[b])
    }))
}

/// Adds `eps` to every finite entry.
pub fn coarsen(psi: &ApproxIsometry, eps: Rat) -> Result<ApproxIsometry, ApxError> {
    if eps.is_negative() {
        return Err(ApxError::NegativeEpsilon);
    }
    Ok(ApproxIsometry {
        values: psi.values.iter().map(|&v| v + eps).collect(),
        ..psi.clone()
    })
}

/// Pointwise `φ ≤ ψ` with `∞` maximal.
pub fn leq(phi: &ApproxIsometry, psi: &ApproxIsometry) -> Result<bool, ApxError> {
    phi.check_same_spaces(psi)?;
    Ok(phi.values.iter().zip(&psi.values).all(|(a, b)| a <= b))
}

/// Certificate that `φ < ψ`: every entry of `ψ − φ` is at least `margin > 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoarseningWitness {
    /// `∞` when every entry of `ψ` is infinite (or there are no entries).
    pub margin: RatInf,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// Minimum of `ψ − φ` under `∞ − r = ∞ − ∞ = ∞`; `None` if some finite `ψ`
/// entry sits above an infinite `φ` entry.
pub fn margin(phi: &ApproxIsometry, psi: &ApproxIsometry) -> Result<Option<RatInf>, ApxError> {
    phi.check_same_spaces(psi)?;
    let mut best = RatInf::Inf;
    for (a, b) in phi.values.iter().zip(&psi.values) {
        match b.margin_over(*a) {
            None => return Ok(None),
            Some(m) => best = best.min(m),
        }
    }
    Ok(Some(best))
}

pub fn strictly_refines(
    phi: &ApproxIsometry,
    psi: &ApproxIsometry,
) -> Result<Option<CoarseningWitness>, ApxError> {
    Ok(match margin(phi, psi)? {
        Some(m) if m > RatInf::ZERO => Some(CoarseningWitness {
            margin: m,
            rows: (0..phi.rows_len()).collect(),
            cols: (0..phi.cols_len()).collect(),
        }),
        _ => None,
    })
}

/// Entrywise maximum.
pub fn pointwise_sup(list: &[ApproxIsometry]) -> Result<ApproxIsometry, ApxError> {
    let first = list.first().ok_or(ApxError::EmptyList)?;
    let mut out = first.clone();
    for psi in &list[1..] {
        out.check_same_spaces(psi)?;
        for (o, v) in out.values.iter_mut().zip(&psi.values) {
            *o = (*o).max(*v);
        }
    }
    Ok(out)
}

/// Limit of a pointwise decreasing chain, i.e. its last element's entrywise
/// minimum with all predecessors (checked to be decreasing).
pub fn limit_of_decreasing(chain: &[ApproxIsometry]) -> Result<ApproxIsometry, ApxError> {
    let first = chain.first().ok_or(ApxError::EmptyList)?;
    let mut out = first.clone();
    for (k, psi) in chain.iter().enumerate().skip(1) {
        if !leq(psi, &chain[k - 1])? {
            return Err(ApxError::NotDecreasing(k));
        }
        for (o, v) in out.values.iter_mut().zip(&psi.values) {
            *o = (*o).min(*v);
        }
    }
    Ok(out)
}

/// Every listed source point has some `y` with `ψ(x, y) ≤ r`.
pub fn r_total(psi: &ApproxIsometry, r: Rat, on: &[usize]) -> bool {
    on.iter().all(|&x| psi.min_over_row(x) <= RatInf::Fin(r))
}

/// Every listed target point has some `x` with `ψ(x, y) ≤ r`.
pub fn r_surjective(psi: &ApproxIsometry, r: Rat, on: &[usize]) -> bool {
    on.iter().all(|&y| psi.min_over_col(y) <= RatInf::Fin(r))
}

pub fn r_bijective(psi: &ApproxIsometry, r: Rat) -> bool {
    let rows: Vec<usize> = (0..psi.rows_len()).collect();
    let cols: Vec<usize> = (0..psi.cols_len()).collect();
    r_total(psi, r, &rows) && r_surjective(psi, r, &cols)
}

/// For each source point the first target point attaining the row minimum.
pub fn extract_map(psi: &ApproxIsometry, delta: Rat) -> Result<Vec<(usize, usize)>, ApxError> {
    if !r_bijective(psi, delta) {
        return Err(ApxError::NotDeltaBijective(delta));
    }
    Ok((0..psi.rows_len())
        .map(|x| {
            let row = psi.row(x);
            let best = row.iter().copied().min().expect("nonempty row");
            (x, row.iter().position(|&v| v == best).expect("attained"))
        })
        .collect())
}

/// `max_i ψ(a_i, b_i)`, `0` for empty tuples.
pub fn sup_product_distance(
    a: &PointTuple<'_>,
    b: &PointTuple<'_>,
    psi: &ApproxIsometry,
) -> Result<RatInf, ApxError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        }
        .into());
    }
    if *a.space() != **psi.source() || *b.space() != **psi.target() {
        return Err(ApxError::SpaceMismatch);
    }
    Ok(a.indices()
        .iter()
        .zip(b.indices())
        .map(|(&x, &y)| psi.get(x, y))
        .max()
        .unwrap_or(RatInf::ZERO))
}

/// Convenience: a matrix of finite values.
pub fn finite_rows(rows: &[Vec<Rat>]) -> Vec<Vec<RatInf>> {
    rows.iter()
        .map(|r| r.iter().map(|&v| RatInf::Fin(v)).collect())
        .collect()
}

/// Convenience: `n × m` all-`∞` value matrix.
pub fn infinite_rows(n: usize, m: usize) -> Vec<Vec<RatInf>> {
    vec![vec![RatInf::Inf; m]; n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::validate_metric;
    use crate::rat::q;

    fn space(rows: &[&[i128]]) -> Space {
        Arc::new(
            validate_metric(
                &rows
                    .iter()
                    .map(|r| r.iter().map(|&v| Rat::int(v)).collect())
                    .collect::<Vec<_>>(),
            )
            .unwrap(),
        )
    }

    fn ints(rows: &[&[i128]]) -> Vec<Vec<RatInf>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| RatInf::Fin(Rat::int(v))).collect())
            .collect()
    }

    fn fin(v: i128) -> RatInf {
        RatInf::Fin(Rat::int(v))
    }

    #[test]
    fn katetov_examples() {
        let x = space(&[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]]);
        let dist_to_p: Vec<RatInf> = (0..3).map(|i| RatInf::Fin(x.dist(i, 1))).collect();
        assert!(is_katetov(&dist_to_p, &x).is_ok());
        assert!(is_katetov(&[RatInf::Inf; 3], &x).is_ok());
        let two = space(&[&[0, 1], &[1, 0]]);
        assert_eq!(
            is_katetov(&[fin(0), fin(0)], &two),
            Err(KatetovError::Violation(0, 1))
        );
        assert!(matches!(
            is_katetov(&[fin(0)], &two),
            Err(KatetovError::LengthMismatch { .. })
        ));
        assert_eq!(
            is_katetov(&[fin(-1)], &space(&[&[0]])),
            Err(KatetovError::Violation(0, 0))
        );
    }

    #[test]
    fn validate_examples() {
        let x = space(&[&[0, 1], &[1, 0]]);
        assert!(validate_apx(&ints(&[&[0, 1], &[1, 0]]), x.clone(), x.clone()).is_ok());
        assert!(validate_apx(&infinite_rows(2, 2), x.clone(), x.clone()).is_ok());
        let one = space(&[&[0]]);
        let err = validate_apx(&ints(&[&[0, 0]]), one, x.clone()).unwrap_err();
        assert_eq!(
            err,
            ApxError::KatetovViolation {
                axis: Axis::Row,
                fixed: 0,
                pair: (0, 1)
            }
        );
        // Mixed finite and infinite entries are never bi-Katětov.
        assert!(validate_apx(
            &[vec![fin(1), RatInf::Inf], vec![fin(1), fin(1)]],
            x.clone(),
            x
        )
        .is_err());
    }

    #[test]
    fn compose_example() {
        let x = space(&[&[0, 2], &[2, 0]]);
        let z = space(&[&[0]]);
        let psi = validate_apx(&ints(&[&[1, 3], &[3, 1]]), x.clone(), x.clone()).unwrap();
        let phi = validate_apx(&ints(&[&[2], &[2]]), x.clone(), z).unwrap();
        let c = compose(&psi, &phi).unwrap();
        assert_eq!(c.rows(), ints(&[&[3], &[3]]));
        assert!(c.validate().is_ok());
        assert_eq!(compose(&phi, &psi), Err(ApxError::SpaceMismatch));
    }

    #[test]
    fn transpose_examples() {
        let x = space(&[&[0, 2], &[2, 0]]);
        let psi = ApproxIsometry::from_fn(x.clone(), x.clone(), |a, b| fin([[1, 3], [0, 2]][a][b]));
        assert_eq!(pseudo_inverse(&psi).rows(), ints(&[&[1, 0], &[3, 2]]));
        let id = ApproxIsometry::identity(x);
        assert_eq!(pseudo_inverse(&id), id);
    }

    #[test]
    fn partial_examples() {
        let x = space(&[&[0, 1], &[1, 0]]);
        let y = space(&[&[0, 1], &[1, 0]]);
        let f = PartialIsometry::new(x.clone(), y.clone(), &[(0, 0)]).unwrap();
        let psi = from_partial(&f);
        assert_eq!(psi.get(1, 1), fin(2));
        assert_eq!(psi.get(0, 0), fin(0));
        let e = PartialIsometry::new(x.clone(), y.clone(), &[]).unwrap();
        assert!(from_partial(&e).is_all_infinite());
        let far = space(&[&[0, 3], &[3, 0]]);
        assert!(matches!(
            PartialIsometry::new(x.clone(), far, &[(0, 0), (1, 1)]),
            Err(ApxError::NotIsometric(..))
        ));
        assert_eq!(
            PartialIsometry::new(x.clone(), y.clone(), &[(0, 0), (0, 1)]),
            Err(ApxError::NotFunction(0))
        );

        // Extending ψ_f from the domain {x1} to X reproduces from_partial.
        let dom = Arc::new(x.subspace(&[0]).unwrap());
        let g = PartialIsometry::new(dom.clone(), y.clone(), &[(0, 0)]).unwrap();
        let ext =
            trivial_extension(&from_partial(&g), x.clone(), y.clone(), &[0], &[0, 1]).unwrap();
        assert_eq!(ext, psi);
    }

    #[test]
    fn extension_identity_and_infinity() {
        let x = space(&[&[0, 1], &[1, 0]]);
        let psi = validate_apx(&ints(&[&[1, 2], &[2, 1]]), x.clone(), x.clone()).unwrap();
        assert_eq!(
            trivial_extension(&psi, x.clone(), x.clone(), &[0, 1], &[0, 1]).unwrap(),
            psi
        );
        let big = space(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]);
        let inf = ApproxIsometry::empty(x.clone(), x.clone());
        assert!(
            trivial_extension(&inf, big.clone(), big.clone(), &[0, 1], &[1, 2])
                .unwrap()
                .is_all_infinite()
        );
        let far = space(&[&[0, 2, 1], &[2, 0, 1], &[1, 1, 0]]);
        assert_eq!(
            trivial_extension(&psi, far, big, &[0, 1], &[0, 1]),
            Err(ApxError::NotIsometricEmbedding(Axis::Row))
        );
    }

    #[test]
    fn restrict_and_coarsen() {
        let x = space(&[&[0, 2], &[2, 0]]);
        let psi = validate_apx(&ints(&[&[1, 3], &[3, 1]]), x.clone(), x.clone()).unwrap();
        assert_eq!(
            restrict(&psi, &[0], &[0, 1]).unwrap().rows(),
            ints(&[&[1, 3]])
        );
        assert_eq!(restrict(&psi, &[0, 1], &[0, 1]).unwrap(), psi);
        assert_eq!(restrict(&psi, &[], &[]).unwrap().values().len(), 0);
        assert_eq!(coarsen(&psi, Rat::ZERO).unwrap(), psi);
        assert_eq!(coarsen(&psi, -Rat::ONE), Err(ApxError::NegativeEpsilon));
        let one = space(&[&[0]]);
        let z = validate_apx(&ints(&[&[0]]), one.clone(), one.clone()).unwrap();
        assert_eq!(
            coarsen(&z, q(1, 2)).unwrap().get(0, 0),
            RatInf::Fin(q(1, 2))
        );
        let inf = ApproxIsometry::empty(x.clone(), x);
        assert_eq!(coarsen(&inf, Rat::ONE).unwrap(), inf);
    }

    #[test]
    fn order_examples() {
        let one = space(&[&[0]]);
        let a = validate_apx(&ints(&[&[1]]), one.clone(), one.clone()).unwrap();
        let b = validate_apx(&ints(&[&[2]]), one.clone(), one.clone()).unwrap();
        assert!(leq(&a, &b).unwrap());
        assert!(!leq(&b, &a).unwrap());
        assert!(leq(&a, &ApproxIsometry::empty(one.clone(), one)).unwrap());

        let x = space(&[&[0, 2], &[2, 0]]);
        let phi = validate_apx(&ints(&[&[1, 3], &[3, 1]]), x.clone(), x.clone()).unwrap();
        let psi = validate_apx(&ints(&[&[2, 3], &[4, 2]]), x.clone(), x.clone()).unwrap();
        assert_eq!(strictly_refines(&phi, &psi).unwrap(), None);
        assert_eq!(strictly_refines(&phi, &phi).unwrap(), None);
        let up = coarsen(&phi, Rat::ONE).unwrap();
        assert_eq!(strictly_refines(&phi, &up).unwrap().unwrap().margin, fin(1));
        let inf = ApproxIsometry::empty(x.clone(), x);
        assert_eq!(strictly_refines(&inf, &phi).unwrap(), None);
        assert_eq!(
            strictly_refines(&phi, &inf).unwrap().unwrap().margin,
            RatInf::Inf
        );
    }

    #[test]
    fn sup_and_limits() {
        let x = space(&[&[0, 2], &[2, 0]]);
        let a = validate_apx(&ints(&[&[1, 3], &[3, 1]]), x.clone(), x.clone()).unwrap();
        let b = validate_apx(&ints(&[&[2, 2], &[2, 2]]), x.clone(), x.clone()).unwrap();
        let s = pointwise_sup(&[a.clone(), b]).unwrap();
        assert_eq!(s.rows(), ints(&[&[2, 3], &[3, 2]]));
        assert!(s.validate().is_ok());
        assert_eq!(pointwise_sup(&[]), Err(ApxError::EmptyList));
        let inf = ApproxIsometry::empty(x.clone(), x.clone());
        assert_eq!(pointwise_sup(&[a.clone(), inf.clone()]).unwrap(), inf);

        let chain = [
            coarsen(&a, Rat::ONE).unwrap(),
            coarsen(&a, q(1, 2)).unwrap(),
            a.clone(),
        ];
        assert_eq!(limit_of_decreasing(&chain).unwrap(), a);
        assert_eq!(limit_of_decreasing(&[a.clone(), a.clone()]).unwrap(), a);
        assert_eq!(
            limit_of_decreasing(&[a.clone(), chain[0].clone()]),
            Err(ApxError::NotDecreasing(1))
        );
    }

    #[test]
    fn totality_examples() {
        let x = space(&[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]]);
        let all = [0, 1, 2];
        let f = PartialIsometry::new(x.clone(), x.clone(), &[(0, 2), (1, 1), (2, 0)]).unwrap();
        let psi = from_partial(&f);
        assert!(r_total(&psi, Rat::ZERO, &all));
        assert!(r_bijective(&psi, Rat::ZERO));
        let inf = ApproxIsometry::empty(x.clone(), x.clone());
        assert!(!r_total(&inf, Rat::int(100), &all));
        assert!(!r_bijective(&inf, Rat::int(100)));
        let eps = q(1, 4);
        let coarse = coarsen(&psi, eps).unwrap();
        assert!(r_total(&coarse, eps, &all));
        assert!(!r_total(&coarse, q(1, 8), &all));
        assert!(r_bijective(&coarse, eps));
        assert_eq!(
            extract_map(&coarse, eps).unwrap(),
            vec![(0, 2), (1, 1), (2, 0)]
        );
        assert_eq!(
            extract_map(&ApproxIsometry::identity(x.clone()), Rat::ZERO).unwrap(),
            vec![(0, 0), (1, 1), (2, 2)]
        );
        assert!(extract_map(&inf, Rat::ONE).is_err());
    }

    #[test]
    fn sup_product_examples() {
        let x = space(&[&[0, 2], &[2, 0]]);
        let psi = ApproxIsometry::identity(x.clone());
        let a = PointTuple::new(&x, vec![0, 1]).unwrap();
        assert_eq!(sup_product_distance(&a, &a, &psi).unwrap(), RatInf::ZERO);
        let e = PointTuple::new(&x, vec![]).unwrap();
        assert_eq!(sup_product_distance(&e, &e, &psi).unwrap(), RatInf::ZERO);
        let phi = validate_apx(&ints(&[&[1, 3], &[3, 2]]), x.clone(), x.clone()).unwrap();
        assert_eq!(sup_product_distance(&a, &a, &phi).unwrap(), fin(2));
        let short = PointTuple::new(&x, vec![0]).unwrap();
        assert!(sup_product_distance(&a, &short, &phi).is_err());
    }
}
