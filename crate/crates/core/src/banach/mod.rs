//! Finite-dimensional Banach spaces with polytopal norms: norm evaluation,
//! the Henson distance between tuples, the seminorm amalgam and its
//! polytopal quotient, and the Gurarij class provider.

pub mod gurarij;
pub mod linalg;
pub mod stage;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::lp::{LinearProgram, Relation};
use crate::rat::Rat;
use linalg::{dot, polytope_vertices};

pub use gurarij::{gurarij_check, Gurarij, GurarijExtension, GurarijLimit, GurarijParams};
pub use stage::{BanachStage, Link, Piece};

/// Longest tuples accepted by `dk_banach`.
pub const MAX_TUPLE_LEN: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BanachError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("functional list is not closed under negation")]
    NotSymmetric,
    #[error("functionals span a space of rank {rank} < {dim}; the norm is degenerate")]
    Degenerate { rank: usize, dim: usize },
    #[error("tuple lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("tuple of length {len} exceeds the bound {max}")]
    TupleTooLong { len: usize, max: usize },
    #[error("r = {r} is below the Henson distance {dk}")]
    RBelowDistance { r: Rat, dk: Rat },
    #[error(
        "dual description disagrees with the seminorm at {vector:?}: dual {dual}, primal {primal}"
    )]
    DualRepresentationMismatch {
        vector: Vec<Rat>,
        dual: Rat,
        primal: Rat,
    },
    #[error("amalgam changes the norm of {vector:?}: {got} instead of {expected}")]
    NormNotPreserved {
        vector: Vec<Rat>,
        expected: Rat,
        got: Rat,
    },
    #[error("amalgam places a matched pair at distance {got} > {r}")]
    PairTooFar { got: Rat, r: Rat },
    #[error("dual enumeration limited to dimension {max}, got {dim}")]
    TooLarge { dim: usize, max: usize },
    #[error("no ε-isometric extension among {candidates} candidates")]
    StepInfeasible { candidates: usize },
    #[error("{0}")]
    Invalid(String),
}

/// A norm given as the maximum of finitely many linear functionals,
/// closed under negation and spanning the dual.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolytopalNormSpace {
    dim: usize,
    functionals: Vec<Vec<Rat>>,
}

impl PolytopalNormSpace {
    pub fn new(dim: usize, functionals: Vec<Vec<Rat>>) -> Result<Self, BanachError> {
        for f in &functionals {
            if f.len() != dim {
                return Err(BanachError::DimensionMismatch {
                    expected: dim,
                    found: f.len(),
                });
            }
        }
        let mut functionals = functionals;
        functionals.sort();
        functionals.dedup();
        if functionals
            .iter()
            .any(|f| functionals.binary_search(&linalg::neg(f)).is_err())
        {
            return Err(BanachError::NotSymmetric);
        }
        let rank = linalg::rank(&functionals);
        if rank < dim {
            return Err(BanachError::Degenerate { rank, dim });
        }
        Ok(PolytopalNormSpace { dim, functionals })
    }

    /// Closes `half` under negation first.
    pub fn symmetric(dim: usize, half: &[Vec<Rat>]) -> Result<Self, BanachError> {
        let mut all: Vec<Vec<Rat>> = half.to_vec();
        all.extend(half.iter().map(|f| linalg::neg(f)));
        Self::new(dim, all)
    }

    pub fn zero() -> Self {
        PolytopalNormSpace {
            dim: 0,
            functionals: Vec::new(),
        }
    }

    /// `‖x‖_∞` on `R^dim`.
    pub fn sup_norm(dim: usize) -> Self {
        let half: Vec<Vec<Rat>> = (0..dim).map(|i| unit(dim, i)).collect();
        Self::symmetric(dim, &half).expect("coordinate functionals span")
    }

    /// `‖x‖_1` on `R^dim`.
    pub fn l1_norm(dim: usize) -> Self {
        let mut all = vec![Vec::new()];
        for _ in 0..dim {
            all = all
                .into_iter()
                .flat_map(|v: Vec<Rat>| {
                    [Rat::ONE, -Rat::ONE].into_iter().map(move |s| {
                        let mut w = v.clone();
                        w.push(s);
                        w
                    })
                })
                .collect();
        }
        Self::new(dim, all).expect("sign vectors span")
    }

    /// The line with `‖t‖ = c |t|`.
    pub fn line(c: Rat) -> Result<Self, BanachError> {
        if !c.is_positive() {
            return Err(BanachError::Degenerate { rank: 0, dim: 1 });
        }
        Self::symmetric(1, &[vec![c]])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn functionals(&self) -> &[Vec<Rat>] {
        &self.functionals
    }

    pub fn norm(&self, x: &[Rat]) -> Result<Rat, BanachError> {
        norm_eval(self, x)
    }

    /// Vertices of the unit ball `{x : ⟨f, x⟩ ≤ 1 ∀f}`.
    pub fn ball_vertices(&self) -> Vec<Vec<Rat>> {
        let cons: Vec<(Vec<Rat>, Rat)> = self
            .functionals
            .iter()
            .map(|f| (f.clone(), Rat::ONE))
            .collect();
        polytope_vertices(&cons, self.dim)
    }

    /// Vertices of the dual ball: the functionals that are not redundant.
    pub fn extreme_functionals(&self) -> Vec<Vec<Rat>> {
        let verts = self.ball_vertices();
        let cons: Vec<(Vec<Rat>, Rat)> = verts.into_iter().map(|v| (v, Rat::ONE)).collect();
        polytope_vertices(&cons, self.dim)
    }

    /// Same norm, listed by its extreme functionals only.
    pub fn canonical(&self) -> Self {
        PolytopalNormSpace {
            dim: self.dim,
            functionals: self.extreme_functionals(),
        }
    }

    /// The norm `s ↦ ‖Σ s_i v_i‖` on coefficient vectors, for independent
    /// `vectors`.
    pub fn pullback(&self, vectors: &[Vec<Rat>]) -> Result<Self, BanachError> {
        let fs = self
            .functionals
            .iter()
            .map(|f| vectors.iter().map(|v| dot(f, v)).collect())
            .collect();
        Self::new(vectors.len(), fs)
    }
}

pub fn unit(dim: usize, i: usize) -> Vec<Rat> {
    let mut v = vec![Rat::ZERO; dim];
    v[i] = Rat::ONE;
    v
}

/// `max_f ⟨f, x⟩`.
pub fn norm_eval(space: &PolytopalNormSpace, x: &[Rat]) -> Result<Rat, BanachError> {
    if x.len() != space.dim {
        return Err(BanachError::DimensionMismatch {
            expected: space.dim,
            found: x.len(),
        });
    }
    Ok(space
        .functionals
        .iter()
        .map(|f| dot(f, x))
        .max()
        .unwrap_or(Rat::ZERO))
}

/// Vectors in a polytopal space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VectorTuple {
    space: PolytopalNormSpace,
    vectors: Vec<Vec<Rat>>,
}

impl VectorTuple {
    pub fn new(space: PolytopalNormSpace, vectors: Vec<Vec<Rat>>) -> Result<Self, BanachError> {
        for v in &vectors {
            if v.len() != space.dim {
                return Err(BanachError::DimensionMismatch {
                    expected: space.dim,
                    found: v.len(),
                });
            }
        }
        Ok(VectorTuple { space, vectors })
    }

    /// The standard basis of the space.
    pub fn basis(space: PolytopalNormSpace) -> Self {
        let vectors = (0..space.dim).map(|i| unit(space.dim, i)).collect();
        VectorTuple { space, vectors }
    }

    pub fn space(&self) -> &PolytopalNormSpace {
        &self.space
    }

    pub fn vectors(&self) -> &[Vec<Rat>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `Σ s_i v_i`.
    pub fn combine(&self, s: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::ZERO; self.space.dim];
        for (c, v) in s.iter().zip(&self.vectors) {
            for (o, &x) in out.iter_mut().zip(v) {
                *o += *c * x;
            }
        }
        out
    }

    pub fn combo_norm(&self, s: &[Rat]) -> Rat {
        norm_eval(&self.space, &self.combine(s)).expect("tuple vectors match the space")
    }
}

/// `sup_{Σ|s_i| = 1} ‖Σ s_i a_i‖ − ‖Σ s_i b_i‖ − Σ w_i |s_i|`.
///
/// For each sign pattern and each functional `f` of `A`, one LP maximizes
/// `⟨f, Σ s_i a_i⟩` minus an epigraph variable for the norm of `B`.
fn one_sided_gap(a: &VectorTuple, b: &VectorTuple, w: &[Rat]) -> Rat {
    let n = a.len();
    let alpha: Vec<Vec<Rat>> = a
        .space
        .functionals
        .iter()
        .map(|f| a.vectors.iter().map(|v| dot(f, v)).collect())
        .collect();
    let beta: Vec<Vec<Rat>> = b
        .space
        .functionals
        .iter()
        .map(|g| b.vectors.iter().map(|v| dot(g, v)).collect())
        .collect();
    let mut best: Option<Rat> = None;
    // s and −s give the same value, so s_0 ≥ 0.
    for mask in 0..(1usize << n.saturating_sub(1)) {
        let sigma: Vec<Rat> = (0..n)
            .map(|i| {
                if i > 0 && mask >> (i - 1) & 1 == 1 {
                    -Rat::ONE
                } else {
                    Rat::ONE
                }
            })
            .collect();
        // Variables u_0..u_{n-1} = σ_i s_i ≥ 0, then t ≥ ‖B s‖.
        let mut lp = LinearProgram::new(n + 1);
        let ones: Vec<(usize, Rat)> = (0..n).map(|i| (i, Rat::ONE)).collect();
        lp.constrain(&ones, Relation::Eq, Rat::ONE);
        for row in &beta {
            let mut c: Vec<(usize, Rat)> = (0..n).map(|i| (i, -(sigma[i] * row[i]))).collect();
            c.push((n, Rat::ONE));
            lp.constrain(&c, Relation::Ge, Rat::ZERO);
        }
        let mut seen: Vec<Vec<Rat>> = Vec::new();
        for row in &alpha {
            let coeffs: Vec<Rat> = (0..n).map(|i| sigma[i] * row[i] - w[i]).collect();
            if seen.contains(&coeffs) {
                continue;
            }
            let mut obj: Vec<(usize, Rat)> = coeffs.iter().copied().enumerate().collect();
            obj.push((n, -Rat::ONE));
            let (v, _) = lp
                .maximize(&obj)
                .optimal()
                .expect("bounded feasible gap LP");
            best = Some(best.map_or(v, |b: Rat| b.max(v)));
            seen.push(coeffs);
        }
    }
    best.unwrap_or(Rat::ZERO)
}

fn check_pair(a: &VectorTuple, b: &VectorTuple) -> Result<(), BanachError> {
    if a.len() != b.len() {
        return Err(BanachError::LengthMismatch(a.len(), b.len()));
    }
    Ok(())
}

/// Largest violation of `| ‖Σ s a‖ − ‖Σ s b‖ | ≤ Σ w_i |s_i|` on the ℓ¹
/// sphere. A matched amalgam with `‖a_i − b_i‖ ≤ w_i` preserving both
/// norms exists iff this is `≤ 0`.
pub fn henson_gap(a: &VectorTuple, b: &VectorTuple, w: &[Rat]) -> Result<Rat, BanachError> {
    check_pair(a, b)?;
    if w.len() != a.len() {
        return Err(BanachError::LengthMismatch(a.len(), w.len()));
    }
    if a.is_empty() {
        return Ok(Rat::ZERO);
    }
    Ok(one_sided_gap(a, b, w).max(one_sided_gap(b, a, w)))
}

/// `sup_{Σ|s_i| = 1} | ‖Σ s_i a_i‖ − ‖Σ s_i b_i‖ |`.
pub fn dk_banach(a: &VectorTuple, b: &VectorTuple) -> Result<Rat, BanachError> {
    check_pair(a, b)?;
    if a.len() > MAX_TUPLE_LEN {
        return Err(BanachError::TupleTooLong {
            len: a.len(),
            max: MAX_TUPLE_LEN,
        });
    }
    henson_gap(a, b, &vec![Rat::ZERO; a.len()])
}

/// Value of the amalgam seminorm, flagged when `r` is below the Henson
/// distance (norms of the factors are then not preserved).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeminormValue {
    pub value: Rat,
    pub r_below_distance: bool,
}

/// `inf_s ‖x − Σ s_i a_i‖ + ‖y − Σ s_i b_i‖ + r Σ |s_i|`, the norm of
/// `x − y` in the amalgam of the spans glued along `a_i ~ b_i`.
pub fn amalgam_seminorm_eval(
    a: &VectorTuple,
    b: &VectorTuple,
    r: Rat,
    x: &[Rat],
    y: &[Rat],
) -> Result<SeminormValue, BanachError> {
    check_pair(a, b)?;
    if x.len() != a.space.dim {
        return Err(BanachError::DimensionMismatch {
            expected: a.space.dim,
            found: x.len(),
        });
    }
    if y.len() != b.space.dim {
        return Err(BanachError::DimensionMismatch {
            expected: b.space.dim,
            found: y.len(),
        });
    }
    let dk = henson_gap(a, b, &vec![Rat::ZERO; a.len()])?;
    let value = seminorm_lp(a, b, r, x, y);
    Ok(SeminormValue {
        value,
        r_below_distance: r < dk,
    })
}

fn seminorm_lp(a: &VectorTuple, b: &VectorTuple, r: Rat, x: &[Rat], y: &[Rat]) -> Rat {
    let n = a.len();
    // s⁺ (0..n), s⁻ (n..2n), t_A, t_B.
    let (ta, tb) = (2 * n, 2 * n + 1);
    let mut lp = LinearProgram::new(2 * n + 2);
    for (side, t, p) in [(a, ta, x), (b, tb, y)] {
        for f in &side.space.functionals {
            let mut c: Vec<(usize, Rat)> = vec![(t, Rat::ONE)];
            for (i, v) in side.vectors.iter().enumerate() {
                let fv = dot(f, v);
                c.push((i, fv));
                c.push((n + i, -fv));
            }
            lp.constrain(&c, Relation::Ge, dot(f, p));
        }
    }
    let mut obj: Vec<(usize, Rat)> = (0..2 * n).map(|i| (i, r)).collect();
    obj.push((ta, Rat::ONE));
    obj.push((tb, Rat::ONE));
    lp.minimize(&obj)
        .optimal()
        .expect("seminorm LP is bounded below by zero")
        .0
}

/// A linear map between coordinate spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinearMap {
    /// Inclusion `R^from → R^to` padding with zeros.
    Pad { from: usize, to: usize },
    /// `rows × cols` matrix.
    Matrix { rows: Vec<Vec<Rat>>, cols: usize },
}

impl LinearMap {
    pub fn source_dim(&self) -> usize {
        match self {
            LinearMap::Pad { from, .. } => *from,
            LinearMap::Matrix { cols, .. } => *cols,
        }
    }

    pub fn target_dim(&self) -> usize {
        match self {
            LinearMap::Pad { to, .. } => *to,
            LinearMap::Matrix { rows, .. } => rows.len(),
        }
    }

    /// Columns are the images of the given vectors.
    pub fn from_columns(target_dim: usize, columns: &[Vec<Rat>]) -> Self {
        let rows = (0..target_dim)
            .map(|i| {
                columns
                    .iter()
                    .map(|c| c.get(i).copied().unwrap_or(Rat::ZERO))
                    .collect()
            })
            .collect();
        LinearMap::Matrix {
            rows,
            cols: columns.len(),
        }
    }

    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        match self {
            LinearMap::Pad { to, .. } => {
                let mut v = x.to_vec();
                v.resize(*to, Rat::ZERO);
                v
            }
            LinearMap::Matrix { rows, .. } => rows.iter().map(|r| dot(r, x)).collect(),
        }
    }
}

/// The amalgam of two spaces over matched tuples, with both embeddings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BanachAmalgam {
    pub space: PolytopalNormSpace,
    pub left: LinearMap,
    pub right: LinearMap,
    /// Number of sample vectors on which the dual description was checked.
    pub verified: usize,
}

/// Quotient of `R^n` by the common kernel of a symmetric functional family:
/// returns the induced norm on `R^k` and the projection `R^n → R^k`.
pub fn quotient_by_kernel(
    functionals: &[Vec<Rat>],
    n: usize,
) -> Result<(PolytopalNormSpace, LinearMap), BanachError> {
    let basis_idx = linalg::independent_rows(functionals);
    let basis: Vec<Vec<Rat>> = basis_idx.iter().map(|&i| functionals[i].clone()).collect();
    let coords: Vec<Vec<Rat>> = functionals
        .iter()
        .map(|f| {
            linalg::coordinates(&basis, f)
                .ok_or_else(|| BanachError::Invalid("functional outside its own span".into()))
        })
        .collect::<Result<_, _>>()?;
    let space = PolytopalNormSpace::new(basis.len(), coords)?;
    Ok((
        space,
        LinearMap::Matrix {
            rows: basis,
            cols: n,
        },
    ))
}

fn sample_vectors(n: usize, extra: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let mut out: Vec<Vec<Rat>> = Vec::new();
    for i in 0..n {
        out.push(unit(n, i));
        for j in 0..i {
            out.push(linalg::add(&unit(n, i), &unit(n, j)));
            out.push(linalg::sub(&unit(n, i), &unit(n, j)));
        }
    }
    let twos: Vec<Rat> = (0..n)
        .map(|i| Rat::new(if i % 2 == 0 { 2 } else { -1 }, (i as i128) + 1))
        .collect();
    out.push(twos);
    out.extend(extra.iter().cloned());
    out
}

/// Amalgam of `⟨ā⟩ ⊕ ⟨b̄⟩` under the seminorm with parameter `r`, modulo its
/// kernel. The dual description is checked against the primal seminorm
/// on a fixed sample before returning; norm preservation of both factors
/// and `‖a_i − b_i‖ ≤ r` are checked on the same sample.
pub fn banach_amalgamate(
    a: &VectorTuple,
    b: &VectorTuple,
    r: Rat,
) -> Result<BanachAmalgam, BanachError> {
    check_pair(a, b)?;
    let dk = henson_gap(a, b, &vec![Rat::ZERO; a.len()])?;
    if r < dk {
        return Err(BanachError::RBelowDistance { r, dk });
    }
    let (da, db) = (a.space.dim, b.space.dim);
    let stage = BanachStage::two_pieces(a, b, r);
    let n = da + db;
    let dual = stage.dual_functionals(stage::MAX_DUAL_DIM)?;
    let (space, proj) = quotient_by_kernel(&dual, n)?;

    let split = |z: &[Rat]| (z[..da].to_vec(), z[da..].to_vec());
    let mut extra: Vec<Vec<Rat>> = Vec::new();
    for (u, v) in a.vectors.iter().zip(&b.vectors) {
        extra.push(u.iter().chain(v).copied().collect());
        extra.push(u.iter().chain(linalg::neg(v).iter()).copied().collect());
    }
    for v in a.space.ball_vertices() {
        extra.push(
            v.iter()
                .copied()
                .chain(core::iter::repeat_n(Rat::ZERO, db))
                .collect(),
        );
    }
    for v in b.space.ball_vertices() {
        extra.push(
            core::iter::repeat_n(Rat::ZERO, da)
                .chain(v.iter().copied())
                .collect(),
        );
    }
    let samples = sample_vectors(n, &extra);
    for z in &samples {
        let (x, y) = split(z);
        let dual_value = norm_eval(&space, &proj.apply(z))?;
        let primal = seminorm_lp(a, b, r, &x, &linalg::neg(&y));
        if dual_value != primal {
            return Err(BanachError::DualRepresentationMismatch {
                vector: z.clone(),
                dual: dual_value,
                primal,
            });
        }
        for (part, side, pad_left) in [(&x, a, true), (&y, b, false)] {
            let embedded: Vec<Rat> = if pad_left {
                part.iter()
                    .copied()
                    .chain(core::iter::repeat_n(Rat::ZERO, db))
                    .collect()
            } else {
                core::iter::repeat_n(Rat::ZERO, da)
                    .chain(part.iter().copied())
                    .collect()
            };
            let expected = norm_eval(&side.space, part)?;
            let got = norm_eval(&space, &proj.apply(&embedded))?;
            if got != expected {
                return Err(BanachError::NormNotPreserved {
                    vector: part.clone(),
                    expected,
                    got,
                });
            }
        }
    }
    for (u, v) in a.vectors.iter().zip(&b.vectors) {
        let z: Vec<Rat> = u.iter().chain(linalg::neg(v).iter()).copied().collect();
        let got = norm_eval(&space, &proj.apply(&z))?;
        if got > r {
            return Err(BanachError::PairTooFar { got, r });
        }
    }
    let LinearMap::Matrix { rows, .. } = &proj else {
        unreachable!()
    };
    let left = LinearMap::Matrix {
        rows: rows.iter().map(|row| row[..da].to_vec()).collect(),
        cols: da,
    };
    let right = LinearMap::Matrix {
        rows: rows.iter().map(|row| row[da..].to_vec()).collect(),
        cols: db,
    };
    Ok(BanachAmalgam {
        space,
        left,
        right,
        verified: samples.len(),
    })
}

/// Direct sum with `‖(x, y)‖ = ‖x‖ + ‖y‖`.
pub fn l1_sum(a: &PolytopalNormSpace, b: &PolytopalNormSpace) -> PolytopalNormSpace {
    if a.dim == 0 {
        return b.clone();
    }
    if b.dim == 0 {
        return a.clone();
    }
    let fs = a
        .functionals
        .iter()
        .flat_map(|f| {
            b.functionals
                .iter()
                .map(move |g| f.iter().chain(g).copied().collect())
        })
        .collect();
    PolytopalNormSpace::new(a.dim + b.dim, fs).expect("sum of norms is a norm")
}
