//! The class of finite-dimensional polytopal Banach spaces as a chain
//! provider, and the ε-isometric extension check for its limits.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::linalg::{add, coordinates, neg, scale};
use super::stage::{BanachStage, Distortion};
use super::{
    banach_amalgamate, dk_banach, henson_gap, BanachError, LinearMap, PolytopalNormSpace,
    VectorTuple,
};
use crate::apx::ApproxIsometry;
use crate::engine::{ClassProvider, EngineError, Joined, LimitApproximation, Task};
use crate::metric::FiniteMetricSpace;
use crate::rat::{Rat, RatInf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GurarijParams {
    /// Grid of scheduled constraint values and of functional coordinates.
    pub grid: Rat,
    /// Largest scheduled constraint value and largest line norm.
    pub cap: Rat,
    pub max_dim: usize,
}

impl GurarijParams {
    pub fn new(grid: Rat, cap: Rat, max_dim: usize) -> Result<Self, BanachError> {
        if !grid.is_positive() || cap < grid {
            return Err(BanachError::Invalid(format!(
                "need 0 < grid ≤ cap, got grid {} cap {}",
                grid, cap
            )));
        }
        if max_dim > 2 {
            return Err(BanachError::Invalid(
                "tuples are enumerated up to dimension 2".into(),
            ));
        }
        Ok(GurarijParams { grid, cap, max_dim })
    }
}

/// Spaces are enumerated with their standard basis as generating tuple:
/// lines `‖t‖ = c|t|` for grid `c ≤ cap` (`c = 1` first) and planes whose
/// unit balls have two or three pairs of grid facets in `[−1, 1]²`.
#[derive(Debug, Clone)]
pub struct Gurarij {
    pub params: GurarijParams,
}

pub type GurarijLimit = LimitApproximation<Gurarij>;

fn to_engine(e: BanachError) -> EngineError {
    EngineError::Invalid(format!("{}", e))
}

impl Gurarij {
    pub fn new(params: GurarijParams) -> Self {
        Gurarij { params }
    }

    fn grid_values(&self, lo: Rat, hi: Rat) -> Vec<Rat> {
        let g = self.params.grid;
        let start = lo.round_up_to(g);
        (0..)
            .map(|k| start + g * Rat::int(k))
            .take_while(|&v| v <= hi)
            .collect()
    }

    fn lines(&self) -> Vec<VectorTuple> {
        let mut cs = self.grid_values(self.params.grid, self.params.cap);
        cs.sort_by_key(|&c| (c != Rat::ONE, c.bit_size(), c));
        cs.into_iter()
            .map(|c| VectorTuple::basis(PolytopalNormSpace::line(c).expect("positive")))
            .collect()
    }

    fn planes(&self, budget: usize) -> Vec<VectorTuple> {
        let vals = self.grid_values(-Rat::ONE, Rat::ONE);
        // Directions up to sign: first nonzero coordinate positive, primitive
        // up to scaling handled by the extreme-set deduplication below.
        let dirs: Vec<Vec<Rat>> = vals
            .iter()
            .flat_map(|&x| vals.iter().map(move |&y| vec![x, y]))
            .filter(|v| v[0].is_positive() || (v[0].is_zero() && v[1].is_positive()))
            .collect();
        let mut sets: Vec<Vec<usize>> = Vec::new();
        for i in 0..dirs.len() {
            for j in i + 1..dirs.len() {
                sets.push(vec![i, j]);
                for k in j + 1..dirs.len() {
                    sets.push(vec![i, j, k]);
                }
            }
        }
        let key = |s: &Vec<usize>| {
            (
                s.len(),
                s.iter()
                    .map(|&i| dirs[i][0].bit_size() + dirs[i][1].bit_size())
                    .sum::<u32>(),
                s.clone(),
            )
        };
        sets.sort_by_cached_key(key);
        let mut seen: Vec<PolytopalNormSpace> = Vec::new();
        let mut out = Vec::new();
        for s in sets {
            if out.len() >= budget {
                break;
            }
            let half: Vec<Vec<Rat>> = s.iter().map(|&i| dirs[i].clone()).collect();
            let Ok(space) = PolytopalNormSpace::symmetric(2, &half) else {
                continue;
            };
            let canon = space.canonical();
            // Every listed facet must be extreme.
            if canon.functionals().len() != 2 * half.len() || seen.contains(&canon) {
                continue;
            }
            seen.push(canon.clone());
            out.push(VectorTuple::basis(canon));
        }
        out
    }

    /// Candidate images of the task tuple among registered copies.
    fn candidates(&self, s: &BanachStage, t: &VectorTuple) -> Vec<Vec<Vec<Rat>>> {
        let mut out: Vec<Vec<Vec<Rat>>> = Vec::new();
        for r in s.registry() {
            if &r.tuple == t {
                out.push(r.images.clone());
                out.push(r.images.iter().map(|v| neg(v)).collect());
            }
        }
        if t.len() == 1 {
            let c = t.combo_norm(&[Rat::ONE]);
            for r in s.registry() {
                if &r.tuple == t {
                    continue;
                }
                for v in &r.images {
                    if s.norm(v) == c {
                        out.push(vec![v.clone()]);
                        out.push(vec![neg(v)]);
                    }
                }
            }
        }
        out
    }

    /// Link weights for gluing `b̄` to `a` under the constraint column, or
    /// `None` when no strict realization exists.
    fn weights(
        &self,
        s: &BanachStage,
        a: &[Rat],
        task: &Task<VectorTuple>,
    ) -> Result<Option<Vec<(usize, Rat)>>, BanachError> {
        let col: Vec<(usize, Rat)> = (0..task.n)
            .filter_map(|i| task.psi.get(i, 0).finite().map(|v| (i, v)))
            .collect();
        if col.is_empty() {
            return Ok(Some(Vec::new()));
        }
        let na = s.norm(a);
        let line = PolytopalNormSpace::line(na)?;
        let at = VectorTuple::new(line, vec![vec![Rat::ONE]; col.len()])?;
        let bt = VectorTuple::new(
            task.tuple.space().clone(),
            col.iter()
                .map(|&(i, _)| task.tuple.vectors()[i].clone())
                .collect(),
        )?;
        let psi: Vec<Rat> = col.iter().map(|&(_, v)| v).collect();
        let gap = henson_gap(&at, &bt, &psi)?;
        if !gap.is_negative() {
            return Ok(None);
        }
        if let Some(target) = &task.target {
            let f: Vec<Rat> = col
                .iter()
                .map(|&(i, _)| target.get(i, 0).finite().unwrap_or(Rat::ZERO))
                .collect();
            if f.iter().all(|v| v.is_positive()) && !henson_gap(&at, &bt, &f)?.is_positive() {
                return Ok(Some(col.iter().map(|&(i, _)| i).zip(f).collect()));
            }
        }
        // gap(ψ − c) = gap(ψ) + c on the ℓ¹ sphere; μ = −gap ≤ min ψ.
        let half = gap / Rat::int(2);
        Ok(Some(col.iter().map(|&(i, v)| (i, v + half)).collect()))
    }
}

impl ClassProvider for Gurarij {
    type Tuple = VectorTuple;
    type Structure = BanachStage;
    type Point = Vec<Rat>;
    type Embedding = LinearMap;

    fn empty_structure(&self) -> BanachStage {
        BanachStage::new()
    }

    fn enumerate_dense(&self, n: usize, budget: usize) -> Vec<VectorTuple> {
        let mut out = match n {
            0 => vec![VectorTuple::basis(PolytopalNormSpace::zero())],
            1 => self.lines(),
            2 if self.params.max_dim >= 2 => self.planes(budget),
            _ => Vec::new(),
        };
        out.truncate(budget);
        out
    }

    fn dk(&self, a: &VectorTuple, b: &VectorTuple) -> Result<Rat, EngineError> {
        dk_banach(a, b).map_err(to_engine)
    }

    /// Both stages are flattened to polytopal spaces (small stages only)
    /// and glued at `r = ε` along the matched points.
    fn amalgamate(
        &self,
        a: &BanachStage,
        b: &BanachStage,
        f: &[(Vec<Rat>, Vec<Rat>)],
        eps: Rat,
    ) -> Result<Joined<Self>, EngineError> {
        if f.is_empty() {
            return self.joint_embed(a, b);
        }
        let (pa, qa) = a.to_polytopal().map_err(to_engine)?;
        let (pb, qb) = b.to_polytopal().map_err(to_engine)?;
        let ta = VectorTuple::new(pa, f.iter().map(|(x, _)| qa.apply(x)).collect())
            .map_err(to_engine)?;
        let tb = VectorTuple::new(pb, f.iter().map(|(_, y)| qb.apply(y)).collect())
            .map_err(to_engine)?;
        let am = banach_amalgamate(&ta, &tb, eps).map_err(to_engine)?;
        let compose = |outer: &LinearMap, inner: &LinearMap, cols: usize| {
            let columns: Vec<Vec<Rat>> = (0..cols)
                .map(|i| outer.apply(&inner.apply(&super::unit(cols, i))))
                .collect();
            LinearMap::from_columns(outer.target_dim(), &columns)
        };
        let left = compose(&am.left, &qa, a.dim());
        let right = compose(&am.right, &qb, b.dim());
        Ok(Joined {
            space: BanachStage::from_space(am.space),
            left,
            right,
        })
    }

    fn joint_embed(&self, a: &BanachStage, b: &BanachStage) -> Result<Joined<Self>, EngineError> {
        let mut space = a.clone();
        let right = space.append_stage(b);
        Ok(Joined {
            left: LinearMap::Pad {
                from: a.dim(),
                to: space.dim(),
            },
            right,
            space,
        })
    }

    fn tuple_space(&self, t: &VectorTuple) -> FiniteMetricSpace {
        let rows: Vec<Vec<Rat>> = t
            .vectors()
            .iter()
            .map(|u| {
                t.vectors()
                    .iter()
                    .map(|v| {
                        super::norm_eval(t.space(), &super::linalg::sub(u, v)).expect("same space")
                    })
                    .collect()
            })
            .collect();
        let labels = (0..t.len()).map(|i| format!("b{}", i)).collect();
        FiniteMetricSpace::new(labels, &rows).expect("tuple vectors are distinct")
    }

    fn tuple_len(&self, t: &VectorTuple) -> usize {
        t.len()
    }

    fn distance(&self, s: &BanachStage, p: &Vec<Rat>, q: &Vec<Rat>) -> Rat {
        s.distance(p, q)
    }

    fn size(&self, s: &BanachStage) -> usize {
        s.dim()
    }

    fn apply(&self, e: &LinearMap, p: &Vec<Rat>) -> Vec<Rat> {
        e.apply(p)
    }

    fn constraint_grid(&self) -> (Rat, Rat) {
        (self.params.grid, self.params.cap)
    }

    fn find_witness(
        &self,
        s: &BanachStage,
        prefix: &[Vec<Rat>],
        task: &Task<VectorTuple>,
    ) -> Option<Vec<Vec<Rat>>> {
        self.candidates(s, &task.tuple).into_iter().find(|images| {
            images.iter().enumerate().all(|(i, x)| {
                prefix
                    .iter()
                    .enumerate()
                    .all(|(j, a)| match task.psi.get(i, j) {
                        RatInf::Inf => true,
                        RatInf::Fin(v) => s.distance(x, a) < v,
                    })
            })
        })
    }

    /// Appends a copy of the tuple's space, glued to the single prefix
    /// point by weights strictly below the constraint.
    fn realize(
        &self,
        s: &mut BanachStage,
        prefix: &[Vec<Rat>],
        task: &Task<VectorTuple>,
    ) -> Result<Option<(LinearMap, Vec<Vec<Rat>>)>, EngineError> {
        let finite_cols: Vec<usize> = (0..task.m)
            .filter(|&j| (0..task.n).any(|i| task.psi.get(i, j).is_finite()))
            .collect();
        if finite_cols.len() > 1 {
            return Err(EngineError::Invalid(
                "Banach tasks constrain at most one prefix point".into(),
            ));
        }
        let links = match finite_cols.first() {
            None => Vec::new(),
            Some(&j) => {
                let a = &prefix[j];
                let narrowed = Task {
                    psi: restrict_col(&task.psi, j),
                    target: task.target.as_ref().map(|t| restrict_col(t, j)),
                    m: 1,
                    ..task.clone()
                };
                match self.weights(s, a, &narrowed).map_err(to_engine)? {
                    None => return Ok(None),
                    Some(ws) => ws
                        .into_iter()
                        .map(|(i, w)| (task.tuple.vectors()[i].clone(), a.clone(), w))
                        .collect(),
                }
            }
        };
        let old = s.dim();
        // The weights keep the Henson gap nonpositive.
        let offset = s
            .add_piece_preserving(task.tuple.space().clone(), links)
            .map_err(to_engine)?;
        let images: Vec<Vec<Rat>> = task
            .tuple
            .vectors()
            .iter()
            .map(|v| {
                let mut x = vec![Rat::ZERO; s.dim()];
                x[offset..offset + v.len()].copy_from_slice(v);
                x
            })
            .collect();
        s.register(task.tuple.clone(), images.clone());
        Ok(Some((
            LinearMap::Pad {
                from: old,
                to: s.dim(),
            },
            images,
        )))
    }

    fn is_embedding(&self, s: &BanachStage, t: &VectorTuple, images: &[Vec<Rat>]) -> bool {
        s.distortion(t, images)
            .map(|d| d.is_isometry())
            .unwrap_or(false)
    }
}

fn restrict_col(psi: &ApproxIsometry, j: usize) -> ApproxIsometry {
    let single = alloc::sync::Arc::new(psi.target().subspace(&[j]).expect("column in range"));
    ApproxIsometry::from_fn(psi.source().clone(), single, |i, _| psi.get(i, j))
}

/// A linear `φ: F → G` found for a Gurarij check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GurarijExtension {
    /// Images of the basis of `F`.
    pub images: Vec<Vec<Rat>>,
    /// `‖φ(ι e_i) − ψ(e_i)‖` over the basis of `E`.
    pub errors: Vec<Rat>,
    pub distortion: Distortion,
    /// Registered copy of `F` used, and whether it was negated. `None` when
    /// `ι` is onto and `φ = ψ ι⁻¹`.
    pub copy: Option<usize>,
    pub negated: bool,
}

/// Looks for `φ: F → G` with `‖φ ι e_i − ψ_i‖ ≤ ε` on the basis of `E` and
/// `(1 − ε)‖x‖ < ‖φx‖ < (1 + ε)‖x‖`, both checked exactly. `iota` maps `E`
/// into `F`; `psi` lists the images of the basis of `E` in the limit.
pub fn gurarij_check(
    limit: &GurarijLimit,
    e: &PolytopalNormSpace,
    f: &PolytopalNormSpace,
    iota: &LinearMap,
    psi: &[Vec<Rat>],
    eps: Rat,
) -> Result<GurarijExtension, BanachError> {
    let g = &limit.space;
    if iota.source_dim() != e.dim() || iota.target_dim() != f.dim() {
        return Err(BanachError::DimensionMismatch {
            expected: e.dim(),
            found: iota.source_dim(),
        });
    }
    if psi.len() != e.dim() {
        return Err(BanachError::LengthMismatch(e.dim(), psi.len()));
    }
    let in_f = BanachStage::from_space(f.clone());
    let iota_cols: Vec<Vec<Rat>> = (0..e.dim())
        .map(|i| iota.apply(&super::unit(e.dim(), i)))
        .collect();
    if !in_f
        .distortion(&VectorTuple::basis(e.clone()), &iota_cols)?
        .is_isometry()
    {
        return Err(BanachError::Invalid(
            "E does not sit isometrically in F".into(),
        ));
    }
    let psi_d = g.distortion(&VectorTuple::basis(e.clone()), psi)?;
    if !psi_d.within(eps) {
        return Err(BanachError::Invalid(format!(
            "ψ has distortion [{}, {}], not within ε",
            psi_d.lower, psi_d.upper
        )));
    }
    let fb = VectorTuple::basis(f.clone());
    if e.dim() == f.dim() {
        let images: Vec<Vec<Rat>> = (0..f.dim())
            .map(|j| {
                let c = coordinates(&iota_cols, &super::unit(f.dim(), j))
                    .expect("isometric ι between equal dimensions is onto");
                c.iter()
                    .zip(psi)
                    .fold(vec![Rat::ZERO; g.dim()], |acc, (&cj, p)| {
                        add(&acc, &scale(cj, p))
                    })
            })
            .collect();
        let distortion = g.distortion(&fb, &images)?;
        if distortion.within(eps) {
            let errors = vec![Rat::ZERO; e.dim()];
            return Ok(GurarijExtension {
                images,
                errors,
                distortion,
                copy: None,
                negated: false,
            });
        }
        return Err(BanachError::StepInfeasible { candidates: 1 });
    }
    let canon = f.canonical();
    let mut tried = 0;
    for (k, r) in g.registry().iter().enumerate() {
        if r.tuple.space().canonical() != canon || r.tuple.vectors() != fb.vectors() {
            continue;
        }
        for negated in [false, true] {
            tried += 1;
            let images: Vec<Vec<Rat>> = if negated {
                r.images.iter().map(|v| neg(v)).collect()
            } else {
                r.images.clone()
            };
            let phi = LinearMap::from_columns(g.dim(), &images);
            let errors: Vec<Rat> = iota_cols
                .iter()
                .zip(psi)
                .map(|(c, p)| g.distance(&phi.apply(c), p))
                .collect();
            if errors.iter().any(|&x| x > eps) {
                continue;
            }
            let distortion = g.distortion(&fb, &images)?;
            if distortion.within(eps) {
                return Ok(GurarijExtension {
                    images,
                    errors,
                    distortion,
                    copy: Some(k),
                    negated,
                });
            }
        }
    }
    Err(BanachError::StepInfeasible { candidates: tried })
}
