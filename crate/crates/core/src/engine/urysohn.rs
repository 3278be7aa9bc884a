//! The bounded metric class `K_{M,1}` (diameter at most a cap) as a provider,
//! with an append-only stage whose distances are integers over one scale.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_integer::Integer;

use super::{
    ClassProvider, EngineError, Joined, LimitApproximation, StageRecord, Task, TaskStatus,
};
use crate::amalgam::{dk_metric, jep_distance, nap_metric, stx_witness, ClassParams};
use crate::apx::{ApproxIsometry, PartialIsometry, Space};
use crate::metric::{FiniteMetricSpace, PointTuple};
use crate::rat::{Rat, RatInf};

/// A finite metric space that grows by appending points. Point `i` is the
/// `i`-th point ever added, so stage inclusions are prefix inclusions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridStage {
    scale: i128,
    /// `rows[p][q] = d(p, q) · scale` for `q < p`.
    rows: Vec<Vec<i64>>,
    max_units: i64,
    index_depth: usize,
    /// `index[m]` maps the distances to points `0..m` to the points having them.
    index: Vec<BTreeMap<Vec<i64>, Vec<usize>>>,
}

impl GridStage {
    pub fn new(scale: i128, index_depth: usize) -> Self {
        GridStage {
            scale,
            rows: Vec::new(),
            max_units: 0,
            index_depth,
            index: vec![BTreeMap::new(); index_depth + 1],
        }
    }

    pub fn from_metric(space: &FiniteMetricSpace, index_depth: usize) -> Self {
        let mut s = GridStage::new(space.scale(), index_depth);
        for p in 0..space.len() {
            let row: Vec<i64> = (0..p).map(|q| space.units(p, q) as i64).collect();
            s.push(row);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn scale(&self) -> i128 {
        self.scale
    }

    #[inline]
    pub fn units(&self, p: usize, q: usize) -> i64 {
        match p.cmp(&q) {
            core::cmp::Ordering::Equal => 0,
            core::cmp::Ordering::Greater => self.rows[p][q],
            core::cmp::Ordering::Less => self.rows[q][p],
        }
    }

    pub fn dist(&self, p: usize, q: usize) -> Rat {
        Rat::new(self.units(p, q) as i128, self.scale)
    }

    pub fn diameter(&self) -> Rat {
        Rat::new(self.max_units as i128, self.scale)
    }

    /// `r · scale` if it is an integer.
    pub fn to_units(&self, r: Rat) -> Option<i64> {
        let v = r * Rat::int(self.scale);
        v.is_integer().then(|| v.numer() as i64)
    }

    /// Refines the scale so that every rational with denominator `den` is
    /// representable.
    pub fn refine_scale(&mut self, den: i128) {
        let new = self.scale.lcm(&den);
        if new == self.scale {
            return;
        }
        let f = (new / self.scale) as i64;
        for row in &mut self.rows {
            for v in row.iter_mut() {
                *v *= f;
            }
        }
        self.max_units *= f;
        self.scale = new;
        for map in &mut self.index {
            let old = core::mem::take(map);
            for (k, v) in old {
                map.insert(k.into_iter().map(|u| u * f).collect(), v);
            }
        }
    }

    fn key(&self, p: usize, m: usize) -> Vec<i64> {
        (0..m).map(|j| self.units(p, j)).collect()
    }

    /// Appends a point with the given distances to all existing points.
    pub fn push(&mut self, row: Vec<i64>) -> usize {
        assert_eq!(row.len(), self.rows.len());
        let p = self.rows.len();
        if let Some(&mx) = row.iter().max() {
            self.max_units = self.max_units.max(mx);
        }
        self.rows.push(row);
        let n = self.rows.len();
        // A new prefix length became available: index every point for it.
        if n <= self.index_depth {
            for q in 0..n {
                let k = self.key(q, n);
                self.index[n].entry(k).or_default().push(q);
            }
        }
        for m in 1..=self.index_depth.min(n - 1) {
            let k = self.key(p, m);
            self.index[m].entry(k).or_default().push(p);
        }
        p
    }

    /// Points whose distances to `0..key.len()` are exactly `key`.
    pub fn lookup(&self, key: &[i64]) -> Option<&[usize]> {
        let m = key.len();
        if m == 0 || m > self.index_depth || m > self.len() {
            return None;
        }
        Some(self.index[m].get(key).map_or(&[][..], |v| v.as_slice()))
    }

    /// The first `k` points.
    pub fn prefix(&self, k: usize) -> GridStage {
        let mut s = GridStage::new(self.scale, self.index_depth);
        for p in 0..k {
            s.push(self.rows[p].clone());
        }
        s
    }

    pub fn to_metric(&self) -> FiniteMetricSpace {
        let n = self.len();
        let mut units = vec![0i128; n * n];
        for p in 0..n {
            for q in 0..p {
                let v = self.rows[p][q] as i128;
                units[p * n + q] = v;
                units[q * n + p] = v;
            }
        }
        let labels = (0..n).map(|i| format!("a{}", i)).collect();
        FiniteMetricSpace::from_units(labels, self.scale, units)
    }

    /// Full triangle check in integer arithmetic.
    pub fn validate(&self) -> Result<(), crate::metric::MetricError> {
        let n = self.len();
        let mut full = vec![0i64; n * n];
        for p in 0..n {
            for q in 0..p {
                let d = self.rows[p][q];
                if d <= 0 {
                    return Err(crate::metric::MetricError::ZeroDistance { p: q, q: p });
                }
                full[p * n + q] = d;
                full[q * n + p] = d;
            }
        }
        for p in 0..n {
            let rp = &full[p * n..(p + 1) * n];
            for q in 0..p {
                let rq = &full[q * n..(q + 1) * n];
                let shortest = rp.iter().zip(rq).map(|(a, b)| a + b).min().unwrap_or(0);
                if shortest < rp[q] {
                    let r = (0..n)
                        .find(|&r| rp[r] + rq[r] < rp[q])
                        .expect("violating point");
                    return Err(crate::metric::MetricError::TriangleViolation { p: q, q: p, r });
                }
            }
        }
        Ok(())
    }
}

/// Metric spaces of diameter at most `cap`; tuples are grid spaces on `n`
/// distinct points.
#[derive(Debug, Clone)]
pub struct UrysohnSphere {
    pub params: ClassParams,
    pub index_depth: usize,
}

pub type UrysohnLimit = LimitApproximation<UrysohnSphere>;

impl UrysohnSphere {
    pub fn new(params: ClassParams) -> Self {
        UrysohnSphere {
            params,
            index_depth: 8,
        }
    }

    pub fn with_index_depth(mut self, depth: usize) -> Self {
        self.index_depth = depth;
        self
    }

    fn grid_scale(&self) -> i128 {
        (self.params.grid_denominator as i128).lcm(&self.params.diameter_cap.denom())
    }

    fn tuple_units(&self, stage: &GridStage, t: &FiniteMetricSpace) -> Option<Vec<i64>> {
        let n = t.len();
        (0..n * n)
            .map(|k| stage.to_units(t.dist(k / n, k % n)))
            .collect()
    }

    /// Backtracking over candidate lists, keeping tuple distances exact.
    fn assign(
        stage: &GridStage,
        tu: &[i64],
        n: usize,
        cands: &[Vec<usize>],
        chosen: &mut Vec<usize>,
    ) -> bool {
        let i = chosen.len();
        if i == n {
            return true;
        }
        for &p in &cands[i] {
            if chosen
                .iter()
                .enumerate()
                .all(|(k, &q)| q != p && stage.units(p, q) == tu[i * n + k])
            {
                chosen.push(p);
                if Self::assign(stage, tu, n, cands, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    fn all_points(stage: &GridStage) -> Vec<usize> {
        (0..stage.len()).collect()
    }

    /// Candidates realizing a row of target distances to the prefix exactly.
    fn exact_candidates(stage: &GridStage, prefix: &[usize], row: &[Rat]) -> Option<Vec<usize>> {
        let key: Vec<i64> = row
            .iter()
            .map(|&r| stage.to_units(r))
            .collect::<Option<_>>()?;
        if key.is_empty() {
            return Some(Self::all_points(stage));
        }
        let indexed = prefix.iter().enumerate().all(|(j, &a)| j == a);
        match (indexed, stage.lookup(&key)) {
            (true, Some(list)) => Some(list.to_vec()),
            _ => Some(
                (0..stage.len())
                    .filter(|&p| {
                        prefix
                            .iter()
                            .zip(&key)
                            .all(|(&a, &k)| stage.units(p, a) == k)
                    })
                    .collect(),
            ),
        }
    }

    /// Appends the amalgam of the stage and the tuple over the trivial
    /// extension of `f: tuple ⇝ prefix`, identifying points at distance 0.
    fn append_over(
        &self,
        stage: &mut GridStage,
        prefix: &[usize],
        t: &FiniteMetricSpace,
        f: &ApproxIsometry,
    ) -> Vec<usize> {
        let mut den = t.scale();
        for v in f.values() {
            den = den.lcm(&v.finite().expect("finite target").denom());
        }
        den = den.lcm(&self.params.diameter_cap.denom());
        stage.refine_scale(den);
        let cap = stage.to_units(self.params.diameter_cap).expect("refined");
        let n = t.len();
        let old = stage.len();
        let fu: Vec<i64> = f
            .values()
            .iter()
            .map(|v| stage.to_units(v.finite().unwrap()).unwrap())
            .collect();
        let tu = self.tuple_units(stage, t).expect("refined");
        let m = prefix.len();
        let mut images: Vec<usize> = Vec::with_capacity(n);
        for i in 0..n {
            let ext = |p: usize| -> i64 {
                let best = (0..m)
                    .map(|j| fu[i * m + j] + stage.units(prefix[j], p))
                    .min();
                best.unwrap_or(cap).min(cap)
            };
            let row_old: Vec<i64> = (0..old).map(ext).collect();
            if let Some(p) = row_old.iter().position(|&v| v == 0) {
                images.push(p);
                continue;
            }
            let mut row = row_old;
            for q in old..stage.len() {
                // Earlier new points come from tuple entries k < i.
                let k = images
                    .iter()
                    .position(|&x| x == q)
                    .expect("new point from tuple");
                row.push(tu[i * n + k]);
            }
            images.push(stage.push(row));
        }
        images
    }

    /// Keeps the first `points` points and the certificate entries that
    /// still have their witnesses.
    pub fn truncate(&self, limit: &UrysohnLimit, points: usize) -> UrysohnLimit {
        let k = points.min(limit.space.len());
        let entries = limit
            .entries
            .iter()
            .filter(|e| match &e.status {
                TaskStatus::Satisfied { images, .. } => {
                    e.task.m <= k && images.iter().all(|&p| p < k)
                }
                TaskStatus::Vacuous => e.task.m <= k,
            })
            .cloned()
            .collect();
        let stages: Vec<StageRecord> = limit
            .stages
            .iter()
            .copied()
            .filter(|s| s.size <= k)
            .collect();
        UrysohnLimit {
            space: limit.space.prefix(k),
            dense: limit.dense.iter().copied().filter(|&p| p < k).collect(),
            stages,
            params: limit.params.clone(),
            entries,
        }
    }
}

impl ClassProvider for UrysohnSphere {
    type Tuple = Space;
    type Structure = GridStage;
    type Point = usize;
    type Embedding = Vec<usize>;

    fn empty_structure(&self) -> GridStage {
        GridStage::new(self.grid_scale(), self.index_depth)
    }

    /// All `n`-point spaces with distances in `{g, 2g, …} ∩ (0, cap]`,
    /// by total bit size and then lexicographically.
    fn enumerate_dense(&self, n: usize, budget: usize) -> Vec<Space> {
        let g = self.params.grid();
        let cap = self.params.diameter_cap;
        let values: Vec<Rat> = (1..)
            .map(|k| g * Rat::int(k))
            .take_while(|&v| v <= cap)
            .collect();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .collect();
        let mut found: Vec<Vec<Rat>> = Vec::new();
        let mut cur = vec![Rat::ZERO; pairs.len()];
        fn rec(
            k: usize,
            pairs: &[(usize, usize)],
            values: &[Rat],
            n: usize,
            cur: &mut Vec<Rat>,
            found: &mut Vec<Vec<Rat>>,
        ) {
            if k == pairs.len() {
                found.push(cur.clone());
                return;
            }
            let idx = |a: usize, b: usize| {
                let (a, b) = if a < b { (a, b) } else { (b, a) };
                pairs.iter().position(|&pq| pq == (a, b)).unwrap()
            };
            let (p, q) = pairs[k];
            for &v in values {
                // Triangles closed by this pair: all other vertices r whose
                // pairs with p and q are already assigned.
                let ok = (0..n).filter(|&r| r != p && r != q).all(|r| {
                    let (i1, i2) = (idx(p, r), idx(q, r));
                    if i1 >= k || i2 >= k {
                        return true;
                    }
                    let (a, b) = (cur[i1], cur[i2]);
                    v <= a + b && a <= v + b && b <= v + a
                });
                if ok {
                    cur[k] = v;
                    rec(k + 1, pairs, values, n, cur, found);
                }
            }
        }
        rec(0, &pairs, &values, n, &mut cur, &mut found);
        found.sort_by_cached_key(|d| (d.iter().map(|r| r.bit_size()).sum::<u32>(), d.clone()));
        found.truncate(budget);
        found
            .into_iter()
            .map(|d| {
                let mut rows = vec![vec![Rat::ZERO; n]; n];
                for (k, &(p, q)) in pairs.iter().enumerate() {
                    rows[p][q] = d[k];
                    rows[q][p] = d[k];
                }
                let labels = (0..n).map(|i| format!("b{}", i)).collect();
                Arc::new(FiniteMetricSpace::new(labels, &rows).expect("enumerated metric"))
            })
            .collect()
    }

    fn dk(&self, a: &Space, b: &Space) -> Result<Rat, EngineError> {
        let ta = PointTuple::new(a, (0..a.len()).collect())?;
        let tb = PointTuple::new(b, (0..b.len()).collect())?;
        Ok(dk_metric(&ta, &tb, &self.params)?)
    }

    fn amalgamate(
        &self,
        a: &GridStage,
        b: &GridStage,
        f: &[(usize, usize)],
        eps: Rat,
    ) -> Result<Joined<Self>, EngineError> {
        let (sa, sb): (Space, Space) = (Arc::new(a.to_metric()), Arc::new(b.to_metric()));
        let pf = PartialIsometry::new(sa.clone(), sb.clone(), f)?;
        let am = nap_metric(&sa, &sb, &pf, eps, &self.params)?;
        Ok(Joined {
            space: GridStage::from_metric(&am.space, self.index_depth),
            left: am.left,
            right: am.right,
        })
    }

    fn joint_embed(&self, a: &GridStage, b: &GridStage) -> Result<Joined<Self>, EngineError> {
        self.amalgamate(a, b, &[], Rat::ZERO)
    }

    fn tuple_space(&self, t: &Space) -> FiniteMetricSpace {
        (**t).clone()
    }

    fn tuple_len(&self, t: &Space) -> usize {
        t.len()
    }

    fn distance(&self, s: &GridStage, p: &usize, q: &usize) -> Rat {
        s.dist(*p, *q)
    }

    fn size(&self, s: &GridStage) -> usize {
        s.len()
    }

    fn apply(&self, e: &Vec<usize>, p: &usize) -> usize {
        e[*p]
    }

    fn constraint_grid(&self) -> (Rat, Rat) {
        (self.params.grid(), self.params.diameter_cap)
    }

    fn find_witness(
        &self,
        s: &GridStage,
        prefix: &[usize],
        task: &Task<Space>,
    ) -> Option<Vec<usize>> {
        let t = &task.tuple;
        let n = t.len();
        let tu = self.tuple_units(s, t)?;
        let cands: Vec<Vec<usize>> = match &task.target {
            // Scheduled tasks are only reused by exact realizations of the target.
            Some(f) => (0..n)
                .map(|i| {
                    let row: Vec<Rat> = f
                        .row(i)
                        .iter()
                        .map(|v| v.finite().expect("finite"))
                        .collect();
                    Self::exact_candidates(s, prefix, &row)
                })
                .collect::<Option<_>>()?,
            None => (0..n)
                .map(|i| {
                    (0..s.len())
                        .filter(|&p| {
                            prefix
                                .iter()
                                .enumerate()
                                .all(|(j, &a)| RatInf::Fin(s.dist(p, a)) < task.psi.get(i, j))
                        })
                        .collect()
                })
                .collect(),
        };
        let mut chosen = Vec::with_capacity(n);
        Self::assign(s, &tu, n, &cands, &mut chosen).then_some(chosen)
    }

    fn realize(
        &self,
        s: &mut GridStage,
        prefix: &[usize],
        task: &Task<Space>,
    ) -> Result<Option<(Vec<usize>, Vec<usize>)>, EngineError> {
        let t = &task.tuple;
        let old = s.len();
        let images = if task.m == 0 || task.psi.is_all_infinite() {
            // Joint embedding at constant distance, no identifications.
            let r = if s.is_empty() {
                Rat::ZERO
            } else {
                jep_distance(&s.to_metric_diameter_only(), t, &self.params)
            };
            let mut den = t.scale().lcm(&r.denom());
            den = den.lcm(&self.params.diameter_cap.denom());
            s.refine_scale(den);
            let ru = s.to_units(r).expect("refined");
            let tu = self.tuple_units(s, t).expect("refined");
            let n = t.len();
            let mut images = Vec::with_capacity(n);
            for i in 0..n {
                let mut row = vec![ru; old];
                row.extend((0..i).map(|k| tu[i * n + k]));
                images.push(s.push(row));
            }
            images
        } else {
            let target = match &task.target {
                Some(f) => f.clone(),
                None => {
                    let ps: Space = Arc::new(self.points_metric(s, prefix, 'a'));
                    let ts: Space = t.clone();
                    let psi =
                        ApproxIsometry::from_fn(ts.clone(), ps.clone(), |i, j| task.psi.get(i, j));
                    match stx_witness(&ts, &ps, &psi, &self.params)? {
                        Some(w) => w.realized,
                        None => return Ok(None),
                    }
                }
            };
            self.append_over(s, prefix, t, &target)
        };
        Ok(Some(((0..old).collect(), images)))
    }

    fn is_embedding(&self, s: &GridStage, t: &Space, images: &[usize]) -> bool {
        images.len() == t.len()
            && images.iter().all(|&p| p < s.len())
            && (0..images.len())
                .all(|i| (0..i).all(|k| s.dist(images[i], images[k]) == t.dist(i, k)))
    }

    fn points_metric(&self, s: &GridStage, points: &[usize], label: char) -> FiniteMetricSpace {
        let n = points.len();
        let mut units = vec![0i128; n * n];
        for i in 0..n {
            for k in 0..n {
                units[i * n + k] = s.units(points[i], points[k]) as i128;
            }
        }
        let labels = (0..n).map(|i| format!("{}{}", label, i)).collect();
        FiniteMetricSpace::from_units(labels, s.scale(), units)
    }
}

impl GridStage {
    /// A stand-in carrying only the diameter, for the joint-embedding distance.
    fn to_metric_diameter_only(&self) -> FiniteMetricSpace {
        let d = self.diameter();
        if d.is_zero() {
            return FiniteMetricSpace::singleton();
        }
        FiniteMetricSpace::unlabeled(&[vec![Rat::ZERO, d], vec![d, Rat::ZERO]]).expect("two points")
    }
}
