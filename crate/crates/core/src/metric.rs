//! Finite metric and pseudo-metric spaces with exact rational distances.
//!
//! Distances are stored as integer multiples of one common denominator so
//! triangle checks on large spaces run on machine integers.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;

use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("row {row} has length {len}, expected {expected}")]
    NonSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("label list has {labels} entries for {points} points")]
    LabelCount { labels: usize, points: usize },
    #[error("negative distance between {p} and {q}")]
    NegativeDistance { p: usize, q: usize },
    #[error("nonzero self-distance at {p}")]
    NonZeroDiagonal { p: usize },
    #[error("asymmetric distance between {p} and {q}")]
    Asymmetric { p: usize, q: usize },
    #[error("distinct points {p} and {q} at distance zero")]
    ZeroDistance { p: usize, q: usize },
    #[error("triangle violation: d({p},{q}) > d({p},{r}) + d({r},{q})")]
    TriangleViolation { p: usize, q: usize, r: usize },
    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("tuple lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// First `(p, q, r)` with `p < q` and `d(p, q) > d(p, r) + d(r, q)`, scanning
/// each pair by a row-wise min-plus product.
fn first_violation<T>(n: usize, units: &[T]) -> Option<(usize, usize, usize)>
where
    T: Copy + Ord + core::ops::Add<Output = T>,
{
    for p in 0..n {
        let rp = &units[p * n..(p + 1) * n];
        for q in p + 1..n {
            let rq = &units[q * n..(q + 1) * n];
            let dpq = rp[q];
            let shortest = rp.iter().zip(rq).map(|(&a, &b)| a + b).min()?;
            if shortest < dpq {
                return (0..n).find(|&r| rp[r] + rq[r] < dpq).map(|r| (p, q, r));
            }
        }
    }
    None
}

/// Symmetric zero-diagonal matrix `units / scale`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Distances {
    n: usize,
    scale: i128,
    units: Vec<i128>,
}

impl Distances {
    fn from_rows(rows: &[Vec<Rat>]) -> Result<Self, MetricError> {
        let n = rows.len();
        for (row, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(MetricError::NonSquare {
                    row,
                    len: r.len(),
                    expected: n,
                });
            }
        }
        let scale = rows
            .iter()
            .flatten()
            .fold(1i128, |acc, r| acc.lcm(&r.denom()));
        let mut units = Vec::with_capacity(n * n);
        for (p, r) in rows.iter().enumerate() {
            for (q, v) in r.iter().enumerate() {
                if v.is_negative() {
                    return Err(MetricError::NegativeDistance { p, q });
                }
                units.push(
                    v.numer()
                        .checked_mul(scale / v.denom())
                        .expect("distance scale overflow"),
                );
            }
        }
        let d = Distances { n, scale, units };
        for p in 0..n {
            if d.get(p, p) != 0 {
                return Err(MetricError::NonZeroDiagonal { p });
            }
            for q in p + 1..n {
                if d.get(p, q) != d.get(q, p) {
                    return Err(MetricError::Asymmetric { p, q });
                }
            }
        }
        Ok(d)
    }

    #[inline]
    fn get(&self, p: usize, q: usize) -> i128 {
        self.units[p * self.n + q]
    }

    fn rat(&self, p: usize, q: usize) -> Rat {
        Rat::new(self.get(p, q), self.scale)
    }

    fn first_triangle_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.n;
        let max = self.units.iter().copied().max().unwrap_or(0);
        if max <= i64::MAX as i128 / 2 {
            let units: Vec<i64> = self.units.iter().map(|&u| u as i64).collect();
            first_violation(n, &units)
        } else {
            first_violation(n, &self.units)
        }
    }

    fn first_zero_pair(&self) -> Option<(usize, usize)> {
        (0..self.n)
            .flat_map(|p| (p + 1..self.n).map(move |q| (p, q)))
            .find(|&(p, q)| self.get(p, q) == 0)
    }

    fn minor(&self, idx: &[usize]) -> Distances {
        let m = idx.len();
        let mut units = Vec::with_capacity(m * m);
        for &p in idx {
            for &q in idx {
                units.push(self.get(p, q));
            }
        }
        Distances {
            n: m,
            scale: self.scale,
            units,
        }
        .normalized()
    }

    /// Divides out any common factor shared by the scale and all entries.
    fn normalized(mut self) -> Distances {
        let g = self.units.iter().fold(self.scale, |g, &u| g.gcd(&u));
        if g > 1 {
            self.scale /= g;
            for u in &mut self.units {
                *u /= g;
            }
        }
        self
    }
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{}", i)).collect()
}

fn check_labels(labels: &[String], n: usize) -> Result<(), MetricError> {
    if labels.len() != n {
        return Err(MetricError::LabelCount {
            labels: labels.len(),
            points: n,
        });
    }
    Ok(())
}

/// A finite metric space: labeled points, exact distances, all triangles hold
/// and distinct points are at positive distance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    d: Distances,
}

/// Like [`FiniteMetricSpace`] but distinct points may be at distance zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PseudoMetricSpace {
    labels: Vec<String>,
    d: Distances,
}

/// Validates a distance matrix, returning the space or the first violation.
pub fn validate_metric(rows: &[Vec<Rat>]) -> Result<FiniteMetricSpace, MetricError> {
    FiniteMetricSpace::new(default_labels(rows.len()), rows)
}

impl FiniteMetricSpace {
    pub fn new(labels: Vec<String>, rows: &[Vec<Rat>]) -> Result<Self, MetricError> {
        let d = Distances::from_rows(rows)?;
        check_labels(&labels, d.n)?;
        if let Some((p, q, r)) = d.first_triangle_violation() {
            return Err(MetricError::TriangleViolation { p, q, r });
        }
        if let Some((p, q)) = d.first_zero_pair() {
            return Err(MetricError::ZeroDistance { p, q });
        }
        Ok(FiniteMetricSpace {
            labels,
            d: d.normalized(),
        })
    }

    pub fn unlabeled(rows: &[Vec<Rat>]) -> Result<Self, MetricError> {
        validate_metric(rows)
    }

    pub fn empty() -> Self {
        FiniteMetricSpace {
            labels: Vec::new(),
            d: Distances {
                n: 0,
                scale: 1,
                units: Vec::new(),
            },
        }
    }

    pub fn singleton() -> Self {
        FiniteMetricSpace {
            labels: default_labels(1),
            d: Distances {
                n: 1,
                scale: 1,
                units: vec![0],
            },
        }
    }

    /// Builds from integer numerators over a common denominator; the caller
    /// guarantees a valid metric and it is re-checked in debug builds.
    pub fn from_units(labels: Vec<String>, scale: i128, units: Vec<i128>) -> Self {
        let n = labels.len();
        assert_eq!(units.len(), n * n, "distance matrix size");
        assert!(scale > 0);
        let d = Distances { n, scale, units };
        debug_assert!(d.first_triangle_violation().is_none());
        debug_assert!(d.first_zero_pair().is_none());
        FiniteMetricSpace {
            labels,
            d: d.normalized(),
        }
    }

    pub fn len(&self) -> usize {
        self.d.n
    }

    pub fn is_empty(&self) -> bool {
        self.d.n == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, p: usize) -> &str {
        &self.labels[p]
    }

    pub fn dist(&self, p: usize, q: usize) -> Rat {
        self.d.rat(p, q)
    }

    /// Common denominator of all distances.
    pub fn scale(&self) -> i128 {
        self.d.scale
    }

    /// `dist(p, q) * scale()`.
    pub fn units(&self, p: usize, q: usize) -> i128 {
        self.d.get(p, q)
    }

    pub fn rows(&self) -> Vec<Vec<Rat>> {
        (0..self.len())
            .map(|p| (0..self.len()).map(|q| self.dist(p, q)).collect())
            .collect()
    }

    pub fn diameter(&self) -> Rat {
        Rat::new(
            self.d.units.iter().copied().max().unwrap_or(0),
            self.d.scale,
        )
    }

    /// Re-runs the full validation.
    pub fn validate(&self) -> Result<(), MetricError> {
        if let Some((p, q, r)) = self.d.first_triangle_violation() {
            return Err(MetricError::TriangleViolation { p, q, r });
        }
        if let Some((p, q)) = self.d.first_zero_pair() {
            return Err(MetricError::ZeroDistance { p, q });
        }
        Ok(())
    }

    pub fn subspace(&self, subset: &[usize]) -> Result<FiniteMetricSpace, MetricError> {
        check_range(subset, self.len())?;
        let mut seen = subset.to_vec();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(MetricError::ZeroDistance { p: w[0], q: w[1] });
        }
        Ok(FiniteMetricSpace {
            labels: subset.iter().map(|&i| self.labels[i].clone()).collect(),
            d: self.d.minor(subset),
        })
    }

    pub fn as_pseudo(&self) -> PseudoMetricSpace {
        PseudoMetricSpace {
            labels: self.labels.clone(),
            d: self.d.clone(),
        }
    }

    /// True when the two spaces have the same distances under the positional
    /// identification (labels ignored).
    pub fn same_distances(&self, other: &FiniteMetricSpace) -> bool {
        self.len() == other.len()
            && (0..self.len()).all(|p| (0..p).all(|q| self.dist(p, q) == other.dist(p, q)))
    }
}

fn check_range(idx: &[usize], len: usize) -> Result<(), MetricError> {
    match idx.iter().find(|&&i| i >= len) {
        Some(&index) => Err(MetricError::IndexOutOfRange { index, len }),
        None => Ok(()),
    }
}

impl PseudoMetricSpace {
    pub fn new(labels: Vec<String>, rows: &[Vec<Rat>]) -> Result<Self, MetricError> {
        let d = Distances::from_rows(rows)?;
        check_labels(&labels, d.n)?;
        if let Some((p, q, r)) = d.first_triangle_violation() {
            return Err(MetricError::TriangleViolation { p, q, r });
        }
        Ok(PseudoMetricSpace {
            labels,
            d: d.normalized(),
        })
    }

    pub fn unlabeled(rows: &[Vec<Rat>]) -> Result<Self, MetricError> {
        Self::new(default_labels(rows.len()), rows)
    }

    pub fn len(&self) -> usize {
        self.d.n
    }

    pub fn is_empty(&self) -> bool {
        self.d.n == 0
    }

    pub fn dist(&self, p: usize, q: usize) -> Rat {
        self.d.rat(p, q)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Identifies points at distance zero. Each class is represented by its
    /// smallest index; `projection[p]` is the class index of `p`.
    pub fn quotient(&self) -> (FiniteMetricSpace, Vec<usize>) {
        let n = self.len();
        let mut uf = UnionFind::new(n);
        for p in 0..n {
            for q in p + 1..n {
                if self.d.get(p, q) == 0 {
                    uf.union(p, q);
                }
            }
        }
        let mut class_of_root = vec![usize::MAX; n];
        let mut reps = Vec::new();
        let mut projection = Vec::with_capacity(n);
        for p in 0..n {
            let root = uf.find(p);
            if class_of_root[root] == usize::MAX {
                class_of_root[root] = reps.len();
                reps.push(p);
            }
            projection.push(class_of_root[root]);
        }
        let space = FiniteMetricSpace {
            labels: reps.iter().map(|&p| self.labels[p].clone()).collect(),
            d: self.d.minor(&reps),
        };
        (space, projection)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// A tuple of points of a space; repeats allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointTuple<'a> {
    space: &'a FiniteMetricSpace,
    indices: Vec<usize>,
}

impl<'a> PointTuple<'a> {
    pub fn new(space: &'a FiniteMetricSpace, indices: Vec<usize>) -> Result<Self, MetricError> {
        check_range(&indices, space.len())?;
        Ok(PointTuple { space, indices })
    }

    pub fn space(&self) -> &'a FiniteMetricSpace {
        self.space
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Distinct entries in order of first appearance.
    pub fn distinct(&self) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for &i in &self.indices {
            if !out.contains(&i) {
                out.push(i);
            }
        }
        out
    }

    /// Distances between tuple entries (a pseudo-metric when entries repeat).
    pub fn configuration(&self) -> Vec<Vec<Rat>> {
        self.indices
            .iter()
            .map(|&i| {
                self.indices
                    .iter()
                    .map(|&j| self.space.dist(i, j))
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::q;

    fn m(rows: &[&[i128]]) -> Vec<Vec<Rat>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| Rat::int(v)).collect())
            .collect()
    }

    #[test]
    fn trivial_spaces_validate() {
        assert!(validate_metric(&m(&[&[0]])).is_ok());
        assert!(validate_metric(&m(&[&[0, 1], &[1, 0]])).is_ok());
        assert!(validate_metric(&[]).is_ok());
    }

    #[test]
    fn first_triangle_violation_is_reported() {
        let err = validate_metric(&m(&[&[0, 1, 3], &[1, 0, 1], &[3, 1, 0]])).unwrap_err();
        assert_eq!(err, MetricError::TriangleViolation { p: 0, q: 2, r: 1 });
    }

    #[test]
    fn malformed_matrices() {
        assert!(matches!(
            validate_metric(&m(&[&[0, 1], &[1]])),
            Err(MetricError::NonSquare { row: 1, .. })
        ));
        assert!(matches!(
            validate_metric(&m(&[&[0, -1], &[-1, 0]])),
            Err(MetricError::NegativeDistance { p: 0, q: 1 })
        ));
        assert!(matches!(
            validate_metric(&m(&[&[0, 1], &[2, 0]])),
            Err(MetricError::Asymmetric { p: 0, q: 1 })
        ));
        assert!(matches!(
            validate_metric(&m(&[&[0, 0], &[0, 0]])),
            Err(MetricError::ZeroDistance { p: 0, q: 1 })
        ));
    }

    #[test]
    fn quotient_examples() {
        let p = PseudoMetricSpace::unlabeled(&m(&[&[0, 0], &[0, 0]])).unwrap();
        let (s, proj) = p.quotient();
        assert_eq!(s.len(), 1);
        assert_eq!(proj, vec![0, 0]);

        let p = PseudoMetricSpace::unlabeled(&m(&[&[0, 0, 1], &[0, 0, 1], &[1, 1, 0]])).unwrap();
        let (s, proj) = p.quotient();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dist(0, 1), Rat::ONE);
        assert_eq!(proj, vec![0, 0, 1]);

        let metric = validate_metric(&m(&[&[0, 2, 1], &[2, 0, 1], &[1, 1, 0]])).unwrap();
        let (s, proj) = metric.as_pseudo().quotient();
        assert_eq!(s, metric);
        assert_eq!(proj, vec![0, 1, 2]);
    }

    #[test]
    fn subspace_minor() {
        let s = validate_metric(&[
            vec![q(0, 1), q(1, 2), q(1, 1)],
            vec![q(1, 2), q(0, 1), q(3, 4)],
            vec![q(1, 1), q(3, 4), q(0, 1)],
        ])
        .unwrap();
        assert_eq!(s.subspace(&[0, 1, 2]).unwrap(), s);
        assert!(s.subspace(&[]).unwrap().is_empty());
        let sub = s.subspace(&[0, 2]).unwrap();
        assert_eq!(
            sub.rows(),
            vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]]
        );
        assert_eq!(sub.labels(), &["p0".to_string(), "p2".to_string()]);
        assert!(matches!(
            s.subspace(&[3]),
            Err(MetricError::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn mixed_denominators_round_trip() {
        let rows = vec![
            vec![q(0, 1), q(1, 3), q(1, 2)],
            vec![q(1, 3), q(0, 1), q(1, 4)],
            vec![q(1, 2), q(1, 4), q(0, 1)],
        ];
        let s = validate_metric(&rows).unwrap();
        assert_eq!(s.rows(), rows);
        assert_eq!(s.scale(), 12);
        assert_eq!(s.diameter(), q(1, 2));
    }

    #[test]
    fn tuple_configuration() {
        let s = validate_metric(&m(&[&[0, 2], &[2, 0]])).unwrap();
        let t = PointTuple::new(&s, vec![1, 0, 1]).unwrap();
        assert_eq!(t.distinct(), vec![1, 0]);
        assert_eq!(
            t.configuration()[0],
            vec![Rat::ZERO, Rat::int(2), Rat::ZERO]
        );
        assert!(PointTuple::new(&s, vec![2]).is_err());
    }
}
