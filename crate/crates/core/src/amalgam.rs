//! Metric amalgams over approximate isometries, the bounded-diameter class,
//! the intrinsic tuple distance `d^K` and strict-witness search.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::apx::{
    coarsen, compose, from_partial, strictly_refines, ApproxIsometry, ApxError, PartialIsometry,
    Space,
};
use crate::lp::{LinearProgram, Relation};
use crate::metric::{FiniteMetricSpace, MetricError, PointTuple, PseudoMetricSpace};
use crate::rat::{Rat, RatInf};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AmalgamError {
    #[error("approximate isometry has an infinite entry")]
    InfiniteValue,
    #[error("amalgam failed validation: {0}")]
    ValidationFailure(MetricError),
    #[error("diameter {diameter} exceeds the cap {cap}")]
    DiameterExceedsCap { diameter: Rat, cap: Rat },
    #[error("not a strict approximate isomorphism")]
    NotStrict,
    #[error("amalgam does not satisfy its contract")]
    WitnessVerification,
    #[error("class parameters need a positive cap and grid")]
    BadParams,
    #[error(transparent)]
    Apx(#[from] ApxError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Metric spaces of diameter at most `diameter_cap`, with grid `1/grid_denominator`
/// used wherever a canonical choice of distance is made.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassParams {
    pub diameter_cap: Rat,
    pub grid_denominator: u32,
}

impl ClassParams {
    pub fn new(diameter_cap: Rat, grid_denominator: u32) -> Result<Self, AmalgamError> {
        if !diameter_cap.is_positive() || grid_denominator == 0 {
            return Err(AmalgamError::BadParams);
        }
        Ok(ClassParams {
            diameter_cap,
            grid_denominator,
        })
    }

    /// The Urysohn sphere class: cap 1.
    pub fn sphere(grid_denominator: u32) -> Self {
        ClassParams {
            diameter_cap: Rat::ONE,
            grid_denominator,
        }
    }

    pub fn grid(&self) -> Rat {
        Rat::new(1, self.grid_denominator as i128)
    }

    fn check(&self, s: &FiniteMetricSpace) -> Result<(), AmalgamError> {
        let diameter = s.diameter();
        if diameter > self.diameter_cap {
            return Err(AmalgamError::DiameterExceedsCap {
                diameter,
                cap: self.diameter_cap,
            });
        }
        Ok(())
    }
}

/// A space with isometric copies of two inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Amalgam {
    pub space: FiniteMetricSpace,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Amalgam {
    /// Cross distances `(x, y) ↦ d(left x, right y)` as a matrix `X ⇝ Y`.
    pub fn realized(&self, x: Space, y: Space) -> ApproxIsometry {
        ApproxIsometry::from_fn(x, y, |a, b| {
            RatInf::Fin(self.space.dist(self.left[a], self.right[b]))
        })
    }

    fn check_embeddings(&self, x: &FiniteMetricSpace, y: &FiniteMetricSpace) -> bool {
        let iso = |s: &FiniteMetricSpace, e: &[usize]| {
            (0..e.len()).all(|a| (0..a).all(|b| self.space.dist(e[a], e[b]) == s.dist(a, b)))
        };
        iso(x, &self.left) && iso(y, &self.right)
    }
}

/// Glues `X` and `Y` along the cross distances `ψ`, truncates at `cap` and
/// identifies points at distance zero.
pub fn amalgam_from_apx(psi: &ApproxIsometry, cap: Option<Rat>) -> Result<Amalgam, AmalgamError> {
    if !psi.is_all_finite() {
        return Err(AmalgamError::InfiniteValue);
    }
    let (x, y) = (psi.source(), psi.target());
    let (n, m) = (x.len(), y.len());
    let truncate = |v: Rat| cap.map_or(v, |c| v.min(c));
    let mut rows = Vec::with_capacity(n + m);
    for a in 0..n + m {
        let row: Vec<Rat> = (0..n + m)
            .map(|b| {
                let v = match (a < n, b < n) {
                    (true, true) => x.dist(a, b),
                    (false, false) => y.dist(a - n, b - n),
                    (true, false) => psi.get(a, b - n).finite().expect("finite"),
                    (false, true) => psi.get(b, a - n).finite().expect("finite"),
                };
                truncate(v)
            })
            .collect();
        rows.push(row);
    }
    let labels = x.labels().iter().chain(y.labels()).cloned().collect();
    let pseudo = PseudoMetricSpace::new(labels, &rows).map_err(AmalgamError::ValidationFailure)?;
    let (space, proj) = pseudo.quotient();
    let out = Amalgam {
        space,
        left: proj[..n].to_vec(),
        right: proj[n..].to_vec(),
    };
    // With a cap, the embeddings are isometric only when the inputs respect it.
    if cap.is_none_or(|c| x.diameter() <= c && y.diameter() <= c) && !out.check_embeddings(x, y) {
        return Err(AmalgamError::WitnessVerification);
    }
    Ok(out)
}

/// Constant cross distance for joint embeddings: half the larger diameter,
/// rounded up to the grid, capped.
pub fn jep_distance(a: &FiniteMetricSpace, b: &FiniteMetricSpace, params: &ClassParams) -> Rat {
    let half = a.diameter().max(b.diameter()) / Rat::int(2);
    half.round_up_to(params.grid()).min(params.diameter_cap)
}

/// Near-amalgamation for the bounded metric class: an amalgam over
/// `ψ_f + ε`, or a joint embedding at constant distance when `f` is empty.
pub fn nap_metric(
    a: &Space,
    b: &Space,
    f: &PartialIsometry,
    eps: Rat,
    params: &ClassParams,
) -> Result<Amalgam, AmalgamError> {
    params.check(a)?;
    params.check(b)?;
    let psi = if f.pairs().is_empty() {
        let r = jep_distance(a, b, params);
        ApproxIsometry::from_fn(a.clone(), b.clone(), |_, _| RatInf::Fin(r))
    } else {
        coarsen(&from_partial(f), eps)?
    };
    let out = amalgam_from_apx(&psi, Some(params.diameter_cap))?;
    let realized = out.realized(a.clone(), b.clone());
    if !crate::apx::leq(&realized, &psi)? || !out.check_embeddings(a, b) {
        return Err(AmalgamError::WitnessVerification);
    }
    Ok(out)
}

/// Variables `ψ(x, y)` laid out row-major, followed by extra variables.
struct KatetovLp {
    lp: LinearProgram,
    cols: usize,
}

impl KatetovLp {
    /// `ψ` bi-Katětov between `x` and `y`, `0 ≤ ψ ≤ cap`, plus `extra` free
    /// slots after the matrix.
    fn new(x: &FiniteMetricSpace, y: &FiniteMetricSpace, cap: Rat, extra: usize) -> Self {
        let (n, m) = (x.len(), y.len());
        let mut lp = LinearProgram::new(n * m + extra);
        let one = Rat::ONE;
        let v = |a: usize, b: usize| a * m + b;
        for b in 0..m {
            for a in 0..n {
                for a2 in a + 1..n {
                    let d = x.dist(a, a2);
                    lp.constrain(&[(v(a, b), one), (v(a2, b), -one)], Relation::Le, d);
                    lp.constrain(&[(v(a2, b), one), (v(a, b), -one)], Relation::Le, d);
                    lp.constrain(&[(v(a, b), one), (v(a2, b), one)], Relation::Ge, d);
                }
            }
        }
        for a in 0..n {
            for b in 0..m {
                for b2 in b + 1..m {
                    let d = y.dist(b, b2);
                    lp.constrain(&[(v(a, b), one), (v(a, b2), -one)], Relation::Le, d);
                    lp.constrain(&[(v(a, b2), one), (v(a, b), -one)], Relation::Le, d);
                    lp.constrain(&[(v(a, b), one), (v(a, b2), one)], Relation::Ge, d);
                }
            }
        }
        for i in 0..n * m {
            lp.constrain(&[(i, one)], Relation::Le, cap);
        }
        KatetovLp { lp, cols: m }
    }

    fn var(&self, a: usize, b: usize) -> usize {
        a * self.cols + b
    }
}

/// `d^K(ā, b̄)`: least `max_i ψ(a_i, b_i)` over bi-Katětov `ψ` between the
/// generated subspaces with values in `[0, cap]`, by exact LP.
pub fn dk_metric(
    a: &PointTuple<'_>,
    b: &PointTuple<'_>,
    params: &ClassParams,
) -> Result<Rat, AmalgamError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        }
        .into());
    }
    let (da, db) = (a.distinct(), b.distinct());
    let sa = a.space().subspace(&da)?;
    let sb = b.space().subspace(&db)?;
    params.check(&sa)?;
    params.check(&sb)?;
    let t = da.len() * db.len();
    let mut k = KatetovLp::new(&sa, &sb, params.diameter_cap, 1);
    for (&ai, &bi) in a.indices().iter().zip(b.indices()) {
        let ra = da.iter().position(|&p| p == ai).expect("distinct");
        let rb = db.iter().position(|&p| p == bi).expect("distinct");
        let var = k.var(ra, rb);
        k.lp.constrain(&[(var, Rat::ONE), (t, -Rat::ONE)], Relation::Le, Rat::ZERO);
    }
    let (value, _) =
        k.lp.minimize(&[(t, Rat::ONE)])
            .optimal()
            .expect("ψ ≡ cap is feasible");
    Ok(value)
}

/// `dk(ā, c̄) ≤ dk(ā, b̄) + dk(b̄, c̄)`.
pub fn dk_triangle_check(
    a: &PointTuple<'_>,
    b: &PointTuple<'_>,
    c: &PointTuple<'_>,
    params: &ClassParams,
) -> Result<bool, AmalgamError> {
    Ok(dk_metric(a, c, params)? <= dk_metric(a, b, params)? + dk_metric(b, c, params)?)
}

/// An amalgam of `A` and `B` whose realized cross distances sit strictly
/// below `φ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StxWitness {
    pub amalgam: Amalgam,
    /// `(x, y) ↦ d(gx, hy)` in the amalgam.
    pub realized: ApproxIsometry,
    pub margin: RatInf,
}

/// Searches an amalgam with `h*g < φ` by maximizing a uniform margin `μ` in
/// an LP over bi-Katětov matrices `ψ ≤ φ − μ`. `None` if the best margin is
/// not positive.
pub fn stx_witness(
    a: &Space,
    b: &Space,
    phi: &ApproxIsometry,
    params: &ClassParams,
) -> Result<Option<StxWitness>, AmalgamError> {
    params.check(a)?;
    params.check(b)?;
    if **phi.source() != **a || **phi.target() != **b {
        return Err(ApxError::SpaceMismatch.into());
    }
    let psi = if phi.is_all_infinite() {
        let r = jep_distance(a, b, params);
        ApproxIsometry::from_fn(a.clone(), b.clone(), |_, _| RatInf::Fin(r))
    } else {
        let mu = a.len() * b.len();
        let mut k = KatetovLp::new(a, b, params.diameter_cap, 1);
        k.lp.constrain(&[(mu, Rat::ONE)], Relation::Le, params.diameter_cap);
        for x in 0..a.len() {
            for y in 0..b.len() {
                if let RatInf::Fin(v) = phi.get(x, y) {
                    k.lp.constrain(&[(k.var(x, y), Rat::ONE), (mu, Rat::ONE)], Relation::Le, v);
                }
            }
        }
        k.lp.set_free(mu);
        let Some((best, point)) = k.lp.maximize(&[(mu, Rat::ONE)]).optimal() else {
            return Ok(None);
        };
        if !best.is_positive() {
            return Ok(None);
        }
        ApproxIsometry::from_fn(a.clone(), b.clone(), |x, y| {
            RatInf::Fin(point[x * b.len() + y])
        })
    };
    let amalgam = amalgam_from_apx(&psi, Some(params.diameter_cap))?;
    let realized = amalgam.realized(a.clone(), b.clone());
    match strictly_refines(&realized, phi)? {
        Some(w) => Ok(Some(StxWitness {
            amalgam,
            realized,
            margin: w.margin,
        })),
        None => Err(AmalgamError::WitnessVerification),
    }
}

/// Certificate that `φ₁φ₀` is strict: a space containing `A₀, A₁, A₂` whose
/// cross distances `ρ: A₀ ⇝ A₂` refine `φ₁φ₀` by `margin`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComposedStx {
    pub space: FiniteMetricSpace,
    pub embed0: Vec<usize>,
    pub embed1: Vec<usize>,
    pub embed2: Vec<usize>,
    pub rho: ApproxIsometry,
    pub margin: RatInf,
}

/// Glues strict witnesses for `φ₀: A₀ ⇝ A₁` and `φ₁: A₁ ⇝ A₂` over `A₁`.
pub fn compose_stx(
    a0: &Space,
    a1: &Space,
    a2: &Space,
    phi0: &ApproxIsometry,
    phi1: &ApproxIsometry,
    params: &ClassParams,
) -> Result<ComposedStx, AmalgamError> {
    let w0 = stx_witness(a0, a1, phi0, params)?.ok_or(AmalgamError::NotStrict)?;
    let w1 = stx_witness(a1, a2, phi1, params)?.ok_or(AmalgamError::NotStrict)?;
    let c0: Space = Arc::new(w0.amalgam.space.clone());
    let c1: Space = Arc::new(w1.amalgam.space.clone());
    let pairs: Vec<(usize, usize)> = (0..a1.len())
        .map(|p| (w0.amalgam.right[p], w1.amalgam.left[p]))
        .collect();
    let glue = PartialIsometry::new(c0.clone(), c1.clone(), &pairs)?;
    let c = nap_metric(&c0, &c1, &glue, Rat::ZERO, params)?;
    let embed0: Vec<usize> = w0.amalgam.left.iter().map(|&p| c.left[p]).collect();
    let embed1: Vec<usize> = w0.amalgam.right.iter().map(|&p| c.left[p]).collect();
    let embed2: Vec<usize> = w1.amalgam.right.iter().map(|&p| c.right[p]).collect();
    let rho = ApproxIsometry::from_fn(a0.clone(), a2.clone(), |x, z| {
        RatInf::Fin(c.space.dist(embed0[x], embed2[z]))
    });
    let target = compose(phi0, phi1)?;
    let margin = strictly_refines(&rho, &target)?
        .ok_or(AmalgamError::NotStrict)?
        .margin;
    Ok(ComposedStx {
        space: c.space,
        embed0,
        embed1,
        embed2,
        rho,
        margin,
    })
}
