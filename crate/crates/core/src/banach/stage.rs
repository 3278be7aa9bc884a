//! Chain stages for the Gurarij build: polytopal pieces glued by weighted
//! links, normed by an exact LP.
//!
//! The norm of `z = Σ_k z_k` (one block per piece) is
//! `inf_λ Σ_k ‖(z − Σ_ℓ λ_ℓ (b_ℓ − a_ℓ))_k‖_k + Σ_ℓ w_ℓ |λ_ℓ|`,
//! where link `ℓ` glues the vector `b_ℓ` of its piece to `a_ℓ`, a vector of
//! the earlier pieces, at cost `w_ℓ`. When every gluing preserves the
//! norms of the earlier pieces, only the pieces a vector touches and their
//! link targets enter the LP.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::linalg::{dot, neg, polytope_vertices};
use super::{quotient_by_kernel, BanachError, LinearMap, PolytopalNormSpace, VectorTuple};
use crate::lp::{LinearProgram, Relation};
use crate::rat::Rat;

/// Dual vertex enumeration runs only up to this total dimension.
pub const MAX_DUAL_DIM: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub space: PolytopalNormSpace,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub piece: usize,
    /// Coordinates inside the piece.
    pub b: Vec<Rat>,
    /// Stage coordinates, supported on earlier pieces.
    pub a: Vec<Rat>,
    pub w: Rat,
}

/// A tuple known to sit isometrically in the stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Registered {
    pub tuple: VectorTuple,
    pub images: Vec<Vec<Rat>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BanachStage {
    pieces: Vec<Piece>,
    links: Vec<Link>,
    registry: Vec<Registered>,
    dim: usize,
    preserving: bool,
}

impl Default for BanachStage {
    fn default() -> Self {
        BanachStage {
            pieces: Vec::new(),
            links: Vec::new(),
            registry: Vec::new(),
            dim: 0,
            preserving: true,
        }
    }
}

/// Extreme values of `‖φx‖ / ‖x‖` for a linear map `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Distortion {
    pub upper: Rat,
    pub lower: Rat,
}

impl Distortion {
    pub fn is_isometry(&self) -> bool {
        self.upper == Rat::ONE && self.lower == Rat::ONE
    }

    /// `(1 − ε)‖x‖ < ‖φx‖ < (1 + ε)‖x‖` for all nonzero `x`.
    pub fn within(&self, eps: Rat) -> bool {
        self.upper < Rat::ONE + eps && self.lower > Rat::ONE - eps
    }
}

fn coord(v: &[Rat], i: usize) -> Rat {
    v.get(i).copied().unwrap_or(Rat::ZERO)
}

impl BanachStage {
    pub fn new() -> Self {
        Self::default()
    }

    /// A single polytopal space.
    pub fn from_space(space: PolytopalNormSpace) -> Self {
        let mut s = Self::new();
        if space.dim() > 0 {
            s.add_piece(space, Vec::new()).expect("no links");
        }
        s
    }

    /// `A ⊕ B` with `b_i` glued to `a_i` at cost `r`.
    pub fn two_pieces(a: &VectorTuple, b: &VectorTuple, r: Rat) -> Self {
        let mut s = Self::new();
        let da = a.space().dim();
        if da > 0 {
            s.add_piece(a.space().clone(), Vec::new())
                .expect("no links");
        }
        if b.space().dim() > 0 {
            let links = a
                .vectors()
                .iter()
                .zip(b.vectors())
                .map(|(u, v)| (v.clone(), u.clone(), r))
                .collect();
            s.add_piece(b.space().clone(), links)
                .expect("links into the first piece");
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn registry(&self) -> &[Registered] {
        &self.registry
    }

    pub fn register(&mut self, tuple: VectorTuple, images: Vec<Vec<Rat>>) {
        self.registry.push(Registered { tuple, images });
    }

    /// Rebuilds a stage from its parts, checking offsets and link shapes.
    pub fn from_parts(
        pieces: Vec<Piece>,
        links: Vec<Link>,
        registry: Vec<Registered>,
    ) -> Result<Self, BanachError> {
        let mut s = Self::new();
        for (k, p) in pieces.iter().enumerate() {
            if p.offset != s.dim {
                return Err(BanachError::Invalid(alloc::format!(
                    "piece {} has offset {}, expected {}",
                    k,
                    p.offset,
                    s.dim
                )));
            }
            let ls: Vec<(Vec<Rat>, Vec<Rat>, Rat)> = links
                .iter()
                .filter(|l| l.piece == k)
                .map(|l| (l.b.clone(), l.a.clone(), l.w))
                .collect();
            s.add_piece(p.space.clone(), ls)?;
        }
        if s.links.len() != links.len() {
            return Err(BanachError::Invalid(
                "link refers to a missing piece".into(),
            ));
        }
        for r in registry {
            if r.images.iter().any(|v| v.len() != s.dim) {
                return Err(BanachError::DimensionMismatch {
                    expected: s.dim,
                    found: r.images[0].len(),
                });
            }
            s.registry.push(r);
        }
        Ok(s)
    }

    /// Whether every gluing is known to keep the norms of earlier pieces.
    pub fn is_preserving(&self) -> bool {
        self.preserving
    }

    /// Appends a piece glued by `(b, a, w)` links; returns its offset. Every
    /// `a` must live on the current coordinates and every `w` must be
    /// nonnegative.
    pub fn add_piece(
        &mut self,
        space: PolytopalNormSpace,
        links: Vec<(Vec<Rat>, Vec<Rat>, Rat)>,
    ) -> Result<usize, BanachError> {
        let glued = !links.is_empty();
        let offset = self.add_piece_preserving(space, links)?;
        if glued {
            self.preserving = false;
        }
        Ok(offset)
    }

    /// As `add_piece`, for links the caller has certified norm-preserving:
    /// `| ‖Σ s_ℓ a_ℓ‖ − ‖Σ s_ℓ b_ℓ‖ | ≤ Σ w_ℓ |s_ℓ|` for all `s`.
    pub fn add_piece_preserving(
        &mut self,
        space: PolytopalNormSpace,
        links: Vec<(Vec<Rat>, Vec<Rat>, Rat)>,
    ) -> Result<usize, BanachError> {
        let k = self.pieces.len();
        let offset = self.dim;
        for (b, a, w) in &links {
            if b.len() != space.dim() {
                return Err(BanachError::DimensionMismatch {
                    expected: space.dim(),
                    found: b.len(),
                });
            }
            if a.len() > offset && a[offset..].iter().any(|x| !x.is_zero()) {
                return Err(BanachError::Invalid(
                    "link target outside the earlier pieces".into(),
                ));
            }
            if w.is_negative() {
                return Err(BanachError::Invalid("negative link weight".into()));
            }
        }
        self.dim += space.dim();
        self.pieces.push(Piece { space, offset });
        for (b, mut a, w) in links {
            a.resize(offset, Rat::ZERO);
            self.links.push(Link { piece: k, b, a, w });
        }
        for r in self.registry.iter_mut() {
            for v in r.images.iter_mut() {
                v.resize(self.dim, Rat::ZERO);
            }
        }
        Ok(offset)
    }

    /// Appends all pieces of `other` after the current ones: the ℓ¹ sum.
    /// Returns the embedding of `other`.
    pub fn append_stage(&mut self, other: &BanachStage) -> LinearMap {
        let shift = self.dim;
        let base = self.pieces.len();
        for (k, p) in other.pieces.iter().enumerate() {
            let links = other
                .links
                .iter()
                .filter(|l| l.piece == k)
                .map(|l| {
                    let mut a = vec![Rat::ZERO; shift];
                    a.extend(l.a.iter().copied());
                    (l.b.clone(), a, l.w)
                })
                .collect();
            self.add_piece_preserving(p.space.clone(), links)
                .expect("shifted links stay on earlier pieces");
        }
        debug_assert_eq!(self.pieces.len(), base + other.pieces.len());
        self.preserving &= other.preserving;
        let cols: Vec<Vec<Rat>> = (0..other.dim)
            .map(|i| {
                let mut v = vec![Rat::ZERO; self.dim];
                v[shift + i] = Rat::ONE;
                v
            })
            .collect();
        let map = LinearMap::from_columns(self.dim, &cols);
        for r in &other.registry {
            let images = r.images.iter().map(|v| map.apply(v)).collect();
            self.registry.push(Registered {
                tuple: r.tuple.clone(),
                images,
            });
        }
        map
    }

    fn piece_of(&self, i: usize) -> usize {
        self.pieces.partition_point(|p| p.offset <= i) - 1
    }

    /// Pieces touched by the vectors, closed under link targets.
    fn closure(&self, vectors: &[&[Rat]]) -> BTreeSet<usize> {
        let mut set = BTreeSet::new();
        for v in vectors {
            for (i, x) in v.iter().enumerate().take(self.dim) {
                if !x.is_zero() {
                    set.insert(self.piece_of(i));
                }
            }
        }
        let mut stack: Vec<usize> = set.iter().copied().collect();
        while let Some(k) = stack.pop() {
            for l in self.links.iter().filter(|l| l.piece == k) {
                for (i, x) in l.a.iter().enumerate() {
                    if !x.is_zero() && set.insert(self.piece_of(i)) {
                        stack.push(self.piece_of(i));
                    }
                }
            }
        }
        set
    }

    /// `min ‖base + Σ_j s_j dirs_j‖` over `s` with `⟨c, s⟩ = r` for each
    /// `(c, r)` in `eqs`. `None` if the constraints are infeasible.
    pub fn min_norm(
        &self,
        base: &[Rat],
        dirs: &[Vec<Rat>],
        eqs: &[(Vec<Rat>, Rat)],
    ) -> Option<Rat> {
        let mut vs: Vec<&[Rat]> = vec![base];
        vs.extend(dirs.iter().map(|d| d.as_slice()));
        let set = if self.preserving {
            self.closure(&vs)
        } else {
            (0..self.pieces.len()).collect()
        };
        let d = dirs.len();
        let links: Vec<&Link> = self
            .links
            .iter()
            .filter(|l| set.contains(&l.piece))
            .collect();
        let nl = links.len();
        let pieces: Vec<usize> = set.into_iter().collect();
        let t0 = d + 2 * nl;
        let mut lp = LinearProgram::new(t0 + pieces.len());
        for j in 0..d {
            lp.set_free(j);
        }
        for (c, r) in eqs {
            let coeffs: Vec<(usize, Rat)> = c.iter().copied().enumerate().collect();
            lp.constrain(&coeffs, Relation::Eq, *r);
        }
        for (kt, &k) in pieces.iter().enumerate() {
            let p = &self.pieces[k];
            let range = p.offset..p.offset + p.space.dim();
            // Link displacement (b̂ − a) restricted to the piece.
            let disp: Vec<Vec<Rat>> = links
                .iter()
                .map(|l| {
                    range
                        .clone()
                        .map(|i| {
                            let bi = if l.piece == k {
                                l.b[i - p.offset]
                            } else {
                                Rat::ZERO
                            };
                            bi - coord(&l.a, i)
                        })
                        .collect()
                })
                .collect();
            let x: Vec<Rat> = range.clone().map(|i| coord(base, i)).collect();
            let dk: Vec<Vec<Rat>> = dirs
                .iter()
                .map(|dv| range.clone().map(|i| coord(dv, i)).collect())
                .collect();
            for f in p.space.functionals() {
                let mut c: Vec<(usize, Rat)> = vec![(t0 + kt, Rat::ONE)];
                for (j, dv) in dk.iter().enumerate() {
                    c.push((j, -dot(f, dv)));
                }
                for (li, dl) in disp.iter().enumerate() {
                    let v = dot(f, dl);
                    c.push((d + 2 * li, v));
                    c.push((d + 2 * li + 1, -v));
                }
                lp.constrain(&c, Relation::Ge, dot(f, &x));
            }
        }
        let mut obj: Vec<(usize, Rat)> = (0..pieces.len()).map(|k| (t0 + k, Rat::ONE)).collect();
        for (li, l) in links.iter().enumerate() {
            obj.push((d + 2 * li, l.w));
            obj.push((d + 2 * li + 1, l.w));
        }
        lp.minimize(&obj).optimal().map(|(v, _)| v)
    }

    pub fn norm(&self, x: &[Rat]) -> Rat {
        self.min_norm(x, &[], &[])
            .expect("unconstrained norm LP is feasible")
    }

    pub fn distance(&self, x: &[Rat], y: &[Rat]) -> Rat {
        let n = x.len().max(y.len());
        let diff: Vec<Rat> = (0..n).map(|i| coord(x, i) - coord(y, i)).collect();
        self.norm(&diff)
    }

    /// Distortion of `Σ s_i t_i ↦ Σ s_i images_i` on the span of the tuple,
    /// whose vectors must be independent. Exact: the upper bound is attained
    /// at unit-ball vertices; the lower bound is the least `‖φx‖` over each
    /// supporting hyperplane `⟨f, x⟩ = 1` of the ball.
    pub fn distortion(
        &self,
        tuple: &VectorTuple,
        images: &[Vec<Rat>],
    ) -> Result<Distortion, BanachError> {
        if images.len() != tuple.len() {
            return Err(BanachError::LengthMismatch(tuple.len(), images.len()));
        }
        if tuple.is_empty() {
            return Ok(Distortion {
                upper: Rat::ONE,
                lower: Rat::ONE,
            });
        }
        let span = tuple.space().pullback(tuple.vectors())?;
        let combine = |s: &[Rat]| -> Vec<Rat> {
            let mut out = vec![Rat::ZERO; self.dim];
            for (c, v) in s.iter().zip(images) {
                for (o, x) in out.iter_mut().zip(v) {
                    *o += *c * *x;
                }
            }
            out
        };
        let upper = span
            .ball_vertices()
            .iter()
            .map(|v| self.norm(&combine(v)))
            .max()
            .unwrap_or(Rat::ZERO);
        let zero = vec![Rat::ZERO; self.dim];
        let mut lower: Option<Rat> = None;
        for f in span.extreme_functionals() {
            let v = self
                .min_norm(&zero, images, &[(f, Rat::ONE)])
                .expect("hyperplane is nonempty");
            lower = Some(lower.map_or(v, |l: Rat| l.min(v)));
        }
        Ok(Distortion {
            upper,
            lower: lower.unwrap_or(Rat::ONE),
        })
    }

    /// Functionals describing the stage norm exactly: the vertices of
    /// `{f : f_k ∈ dual ball of piece k, |⟨f, b̂_ℓ − a_ℓ⟩| ≤ w_ℓ}`.
    pub fn dual_functionals(&self, max_dim: usize) -> Result<Vec<Vec<Rat>>, BanachError> {
        let n = self.dim;
        if n > max_dim {
            return Err(BanachError::TooLarge {
                dim: n,
                max: max_dim,
            });
        }
        let mut cons: Vec<(Vec<Rat>, Rat)> = Vec::new();
        for p in &self.pieces {
            for v in p.space.ball_vertices() {
                let mut row = vec![Rat::ZERO; n];
                row[p.offset..p.offset + v.len()].copy_from_slice(&v);
                cons.push((row, Rat::ONE));
            }
        }
        for l in &self.links {
            let off = self.pieces[l.piece].offset;
            let mut row: Vec<Rat> = (0..n).map(|i| -coord(&l.a, i)).collect();
            for (i, &b) in l.b.iter().enumerate() {
                row[off + i] += b;
            }
            cons.push((neg(&row), l.w));
            cons.push((row, l.w));
        }
        Ok(polytope_vertices(&cons, n)
            .into_iter()
            .filter(|v| !v.iter().all(|x| x.is_zero()))
            .collect())
    }

    /// The stage as one polytopal space (modulo the kernel of its seminorm)
    /// with the projection from stage coordinates.
    pub fn to_polytopal(&self) -> Result<(PolytopalNormSpace, LinearMap), BanachError> {
        if self.dim == 0 {
            return Ok((
                PolytopalNormSpace::zero(),
                LinearMap::Pad { from: 0, to: 0 },
            ));
        }
        let dual = self.dual_functionals(MAX_DUAL_DIM)?;
        quotient_by_kernel(&dual, self.dim)
    }
}
