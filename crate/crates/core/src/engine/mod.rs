//! Generic limit machinery: the class-provider contract, task schedules, the
//! chain builder and its certificate.

pub mod backforth;
pub mod check;
pub mod schedule;
pub mod urysohn;

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt::Debug;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::amalgam::AmalgamError;
use crate::apx::{coarsen, strictly_refines, ApproxIsometry, ApxError, Space};
use crate::metric::{FiniteMetricSpace, MetricError};
use crate::rat::{Rat, RatInf};

pub use schedule::{enumerate_grid_apx, schedule_level, schedule_tasks};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("budget exceeded: more than {limit} {what}")]
    BudgetExceeded { what: &'static str, limit: usize },
    #[error("bounds admit no tasks")]
    EmptyBounds,
    #[error("witness for task {task} failed verification")]
    WitnessVerification { task: usize },
    #[error("step {step} infeasible with prefix {prefix}")]
    StepInfeasible { step: usize, prefix: usize },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Amalgam(#[from] AmalgamError),
    #[error(transparent)]
    Apx(#[from] ApxError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// An amalgam of two members: the joint structure and both embeddings.
#[derive(Debug, Clone)]
pub struct Joined<P: ClassProvider + ?Sized> {
    pub space: P::Structure,
    pub left: P::Embedding,
    pub right: P::Embedding,
}

/// What a class must supply to the engine.
pub trait ClassProvider {
    /// A generating tuple `b̄` together with the member it generates.
    type Tuple: Clone + Debug + PartialEq;
    /// A member of the class (a chain stage).
    type Structure: Clone + Debug;
    type Point: Clone + Debug + PartialEq;
    type Embedding: Clone + Debug;

    fn empty_structure(&self) -> Self::Structure;

    /// Representatives of `K_{n,0}`, ordered so that a larger budget only
    /// appends.
    fn enumerate_dense(&self, n: usize, budget: usize) -> Vec<Self::Tuple>;

    fn dk(&self, a: &Self::Tuple, b: &Self::Tuple) -> Result<Rat, EngineError>;

    /// Amalgam of `A` and `B` over the partial map given on generator pairs,
    /// with `ψ_f + ε ≥ h*g`.
    fn amalgamate(
        &self,
        a: &Self::Structure,
        b: &Self::Structure,
        f: &[(Self::Point, Self::Point)],
        eps: Rat,
    ) -> Result<Joined<Self>, EngineError>;

    fn joint_embed(
        &self,
        a: &Self::Structure,
        b: &Self::Structure,
    ) -> Result<Joined<Self>, EngineError>;

    /// The tuple entries as a metric space (entries are distinct).
    fn tuple_space(&self, t: &Self::Tuple) -> FiniteMetricSpace;

    fn tuple_len(&self, t: &Self::Tuple) -> usize {
        self.tuple_space(t).len()
    }

    fn distance(&self, s: &Self::Structure, p: &Self::Point, q: &Self::Point) -> Rat;

    /// Point count or dimension; recorded per stage.
    fn size(&self, s: &Self::Structure) -> usize;

    fn apply(&self, e: &Self::Embedding, p: &Self::Point) -> Self::Point;

    /// Grid step and largest value of scheduled constraint matrices.
    fn constraint_grid(&self) -> (Rat, Rat);

    /// An existing embedding of the tuple satisfying the task, if any.
    fn find_witness(
        &self,
        s: &Self::Structure,
        prefix: &[Self::Point],
        task: &Task<Self::Tuple>,
    ) -> Option<Vec<Self::Point>>;

    /// Extends `s` in place so that the task is satisfied. Returns the
    /// inclusion of the old stage and the images of the tuple, or `None` when
    /// the constraint is not a strict approximate isomorphism.
    fn realize(
        &self,
        s: &mut Self::Structure,
        prefix: &[Self::Point],
        task: &Task<Self::Tuple>,
    ) -> Result<Option<Realized<Self>>, EngineError>;

    /// Whether `images` carry the tuple isomorphically into `s`.
    fn is_embedding(&self, s: &Self::Structure, t: &Self::Tuple, images: &[Self::Point]) -> bool;

    fn points_metric(
        &self,
        s: &Self::Structure,
        points: &[Self::Point],
        label: char,
    ) -> FiniteMetricSpace {
        let rows: Vec<Vec<Rat>> = points
            .iter()
            .map(|p| points.iter().map(|q| self.distance(s, p, q)).collect())
            .collect();
        let labels = (0..points.len())
            .map(|i| alloc::format!("{}{}", label, i))
            .collect();
        FiniteMetricSpace::new(labels, &rows).expect("distinct points of a metric structure")
    }
}

/// One saturation obligation: embed `b̄` so that its distances to the
/// prefix `a_{<m}` are strictly below `ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Task<T> {
    pub tuple: T,
    /// Position of the tuple in `enumerate_dense(n, ·)`.
    pub tuple_index: usize,
    pub n: usize,
    pub m: usize,
    pub psi: ApproxIsometry,
    pub eps: Rat,
    /// For scheduled tasks `ψ = target + ε` with a grid bi-Katětov target.
    pub target: Option<ApproxIsometry>,
}

impl<T> Task<T> {
    pub fn scheduled(
        tuple: T,
        tuple_index: usize,
        target: ApproxIsometry,
        eps: Rat,
    ) -> Result<Self, EngineError> {
        if !eps.is_positive() {
            return Err(EngineError::Invalid(
                "task tolerance must be positive".into(),
            ));
        }
        let psi = coarsen(&target, eps)?;
        Ok(Task {
            tuple,
            tuple_index,
            n: psi.rows_len(),
            m: psi.cols_len(),
            psi,
            eps,
            target: Some(target),
        })
    }

    pub fn general(
        tuple: T,
        tuple_index: usize,
        psi: ApproxIsometry,
        eps: Rat,
    ) -> Result<Self, EngineError> {
        if !eps.is_positive() {
            return Err(EngineError::Invalid(
                "task tolerance must be positive".into(),
            ));
        }
        psi.validate()?;
        Ok(Task {
            tuple,
            tuple_index,
            n: psi.rows_len(),
            m: psi.cols_len(),
            psi,
            eps,
            target: None,
        })
    }

    /// `n + m + Σ bit sizes`, the dovetailing key.
    pub fn size(&self) -> u64 {
        let bits: u64 = self.psi.values().iter().map(|v| v.bit_size() as u64).sum();
        (self.n + self.m) as u64 + bits
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TaskStatus<P> {
    /// `images` are in the coordinates of the final stage; `stage` is where
    /// the witness first appeared.
    Satisfied {
        images: Vec<P>,
        stage: usize,
        reused: bool,
    },
    Vacuous,
}

/// The inclusion of the old stage and the images of a task's tuple.
pub type Realized<P> = (
    <P as ClassProvider>::Embedding,
    Vec<<P as ClassProvider>::Point>,
);

/// The certificate of a provider's limit approximations.
pub type Certificate<P> =
    Vec<CertificateEntry<<P as ClassProvider>::Tuple, <P as ClassProvider>::Point>>;

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateEntry<T, P> {
    pub task: Task<T>,
    pub status: TaskStatus<P>,
}

/// Size limits of a build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub max_n: usize,
    pub max_m: usize,
    /// Largest `n · m` scheduled for tuples of two or more points; one-point
    /// tasks run over every prefix up to `max_m`.
    pub max_cells: usize,
    pub eps: Rat,
    pub tuple_budget: usize,
    pub max_tasks: usize,
    pub max_points: usize,
}

impl Bounds {
    pub fn new(max_n: usize, max_m: usize, eps: Rat) -> Self {
        Bounds {
            max_n,
            max_m,
            max_cells: max_n * max_m,
            eps,
            tuple_budget: 10_000,
            max_tasks: 1_000_000,
            max_points: 100_000,
        }
    }

    pub fn with_max_cells(mut self, cells: usize) -> Self {
        self.max_cells = cells;
        self
    }

    pub fn admits(&self, n: usize, m: usize) -> bool {
        n >= 1 && n <= self.max_n && m <= self.max_m && (n == 1 || n * m <= self.max_cells)
    }

    pub fn max_level(&self) -> usize {
        (1..=self.max_n)
            .flat_map(|n| (0..=self.max_m).map(move |m| (n, m)))
            .filter(|&(n, m)| self.admits(n, m))
            .map(|(n, m)| n + m)
            .max()
            .unwrap_or(0)
    }
}

/// Seed for a randomized schedule: each level's task order is shuffled by a
/// ChaCha stream keyed on the seed and the level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenericSeed(pub u64);

impl GenericSeed {
    pub fn permute<T>(&self, level: usize, items: &mut [T]) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(level as u64);
        items.shuffle(&mut rng);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageRecord {
    /// Certificate entry that created the stage (`None` for `A_0`).
    pub task: Option<usize>,
    pub size: usize,
}

/// An increasing chain of stages with its dense sequence and certificate.
#[derive(Debug, Clone)]
pub struct Chain<P: ClassProvider> {
    pub stage: P::Structure,
    pub stages: Vec<StageRecord>,
    pub inclusions: Vec<P::Embedding>,
    /// Dense points with the stage where each first appeared.
    pub dense: Vec<(P::Point, usize)>,
    pub entries: Vec<CertificateEntry<P::Tuple, P::Point>>,
}

impl<P: ClassProvider> Chain<P> {
    pub fn new(provider: &P) -> Self {
        let stage = provider.empty_structure();
        let size = provider.size(&stage);
        Chain {
            stage,
            stages: alloc::vec![StageRecord { task: None, size }],
            inclusions: Vec::new(),
            dense: Vec::new(),
            entries: Vec::new(),
        }
    }

    pub fn dense_points(&self) -> Vec<P::Point> {
        self.dense.iter().map(|(p, _)| p.clone()).collect()
    }

    pub fn prefix_space(&self, provider: &P, m: usize) -> Space {
        let pts: Vec<P::Point> = self.dense[..m].iter().map(|(p, _)| p.clone()).collect();
        Arc::new(provider.points_metric(&self.stage, &pts, 'a'))
    }
}

/// Recomputes `ψ_h` for a witness against the prefix.
pub fn witness_matrix<P: ClassProvider>(
    provider: &P,
    stage: &P::Structure,
    prefix: &[P::Point],
    images: &[P::Point],
    task: &Task<P::Tuple>,
) -> ApproxIsometry {
    ApproxIsometry::from_fn(
        task.psi.source().clone(),
        task.psi.target().clone(),
        |i, j| RatInf::Fin(provider.distance(stage, &images[i], &prefix[j])),
    )
}

fn verify_witness<P: ClassProvider>(
    provider: &P,
    stage: &P::Structure,
    prefix: &[P::Point],
    images: &[P::Point],
    task: &Task<P::Tuple>,
) -> Result<bool, EngineError> {
    if images.len() != task.n || !provider.is_embedding(stage, &task.tuple, images) {
        return Ok(false);
    }
    let h = witness_matrix(provider, stage, prefix, images, task);
    Ok(strictly_refines(&h, &task.psi)?.is_some())
}

/// Runs one task against the chain: reuse an existing witness, otherwise
/// extend the stage, otherwise record the task as vacuous.
pub fn extend_chain_step<P: ClassProvider>(
    chain: &mut Chain<P>,
    task: Task<P::Tuple>,
    provider: &P,
) -> Result<(), EngineError> {
    if task.m > chain.dense.len() {
        return Err(EngineError::Invalid(alloc::format!(
            "task needs a prefix of {} points, chain has {}",
            task.m,
            chain.dense.len()
        )));
    }
    let index = chain.entries.len();
    let prefix: Vec<P::Point> = chain.dense[..task.m]
        .iter()
        .map(|(p, _)| p.clone())
        .collect();
    if let Some(images) = provider.find_witness(&chain.stage, &prefix, &task) {
        if !verify_witness(provider, &chain.stage, &prefix, &images, &task)? {
            return Err(EngineError::WitnessVerification { task: index });
        }
        let stage = chain.stages.len() - 1;
        chain.entries.push(CertificateEntry {
            task,
            status: TaskStatus::Satisfied {
                images,
                stage,
                reused: true,
            },
        });
        return Ok(());
    }
    match provider.realize(&mut chain.stage, &prefix, &task)? {
        None => {
            chain.entries.push(CertificateEntry {
                task,
                status: TaskStatus::Vacuous,
            });
        }
        Some((inclusion, images)) => {
            for (p, _) in chain.dense.iter_mut() {
                *p = provider.apply(&inclusion, p);
            }
            for e in chain.entries.iter_mut() {
                if let TaskStatus::Satisfied { images, .. } = &mut e.status {
                    for p in images.iter_mut() {
                        *p = provider.apply(&inclusion, p);
                    }
                }
            }
            let prefix: Vec<P::Point> = chain.dense[..task.m]
                .iter()
                .map(|(p, _)| p.clone())
                .collect();
            if !verify_witness(provider, &chain.stage, &prefix, &images, &task)? {
                return Err(EngineError::WitnessVerification { task: index });
            }
            let stage = chain.stages.len();
            chain.stages.push(StageRecord {
                task: Some(index),
                size: provider.size(&chain.stage),
            });
            chain.inclusions.push(inclusion);
            for p in &images {
                if !chain.dense.iter().any(|(q, _)| q == p) {
                    chain.dense.push((p.clone(), stage));
                }
            }
            chain.entries.push(CertificateEntry {
                task,
                status: TaskStatus::Satisfied {
                    images,
                    stage,
                    reused: false,
                },
            });
        }
    }
    Ok(())
}

/// Parameters recorded with a certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildParams {
    pub bounds: Bounds,
    pub grid: Rat,
    pub cap: Rat,
    pub seed: Option<u64>,
}

/// A finite approximation to a limit: the last stage, its dense sequence and
/// the certificate of satisfied tasks.
#[derive(Debug, Clone)]
pub struct LimitApproximation<P: ClassProvider> {
    pub space: P::Structure,
    pub dense: Vec<P::Point>,
    pub stages: Vec<StageRecord>,
    pub params: BuildParams,
    pub entries: Vec<CertificateEntry<P::Tuple, P::Point>>,
}

impl<P: ClassProvider> LimitApproximation<P> {
    /// Number of dense points every scheduled task may refer to.
    pub fn certified_prefix(&self) -> usize {
        self.params.bounds.max_m.min(self.dense.len())
    }

    pub fn satisfied(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e.status, TaskStatus::Satisfied { .. }))
            .count()
    }

    pub fn vacuous(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e.status, TaskStatus::Vacuous))
            .count()
    }
}

/// Builds a chain through every scheduled task, level by level.
pub fn build_limit<P: ClassProvider>(
    provider: &P,
    bounds: &Bounds,
    seed: Option<GenericSeed>,
) -> Result<LimitApproximation<P>, EngineError> {
    let mut chain = Chain::new(provider);
    let tuples: Vec<Vec<P::Tuple>> = (0..=bounds.max_n)
        .map(|n| provider.enumerate_dense(n, bounds.tuple_budget))
        .collect();
    let mut processed = 0usize;
    for level in 1..=bounds.max_level() {
        let prefix = chain.dense_points();
        let mut tasks = schedule_level(provider, &chain.stage, &prefix, &tuples, bounds, level)?;
        if let Some(seed) = seed {
            seed.permute(level, &mut tasks);
        }
        for task in tasks {
            processed += 1;
            if processed > bounds.max_tasks {
                return Err(EngineError::BudgetExceeded {
                    what: "tasks",
                    limit: bounds.max_tasks,
                });
            }
            extend_chain_step(&mut chain, task, provider)?;
            if provider.size(&chain.stage) > bounds.max_points {
                return Err(EngineError::BudgetExceeded {
                    what: "points",
                    limit: bounds.max_points,
                });
            }
        }
    }
    let (grid, cap) = provider.constraint_grid();
    Ok(LimitApproximation {
        dense: chain.dense_points(),
        space: chain.stage,
        stages: chain.stages,
        params: BuildParams {
            bounds: *bounds,
            grid,
            cap,
            seed: seed.map(|s| s.0),
        },
        entries: chain.entries,
    })
}

/// Re-checks every satisfied entry against the final stage. Returns the
/// number of verified entries.
pub fn verify_certificate<P: ClassProvider>(
    provider: &P,
    limit: &LimitApproximation<P>,
) -> Result<usize, EngineError> {
    let mut ok = 0;
    for (k, e) in limit.entries.iter().enumerate() {
        if let TaskStatus::Satisfied { images, .. } = &e.status {
            let prefix = &limit.dense[..e.task.m];
            if !verify_witness(provider, &limit.space, prefix, images, &e.task)? {
                return Err(EngineError::WitnessVerification { task: k });
            }
            ok += 1;
        }
    }
    Ok(ok)
}
