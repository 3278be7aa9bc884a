//! Build artifacts: the final stage, the dense sequence and the certificate
//! of a limit approximation, for either shipped class. Loading re-validates
//! the space and re-verifies every satisfied task.

use std::sync::Arc;

use metfraisse_core::amalgam::ClassParams;
use metfraisse_core::apx::{ApproxIsometry, Space};
use metfraisse_core::banach::stage::Registered;
use metfraisse_core::banach::{BanachStage, Gurarij, GurarijLimit, GurarijParams, Link, Piece};
use metfraisse_core::engine::urysohn::{GridStage, UrysohnLimit, UrysohnSphere};
use metfraisse_core::engine::{
    verify_certificate, Bounds, BuildParams, Certificate, CertificateEntry, ClassProvider,
    StageRecord, Task, TaskStatus,
};
use metfraisse_core::metric::FiniteMetricSpace;
use metfraisse_core::{Rat, RatInf};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::format::{
    parse_rat, parse_row, parse_rows, rat_row, NormSpaceJson, SpaceJson, VectorTupleJson,
};

pub const URYSOHN: &str = "urysohn-sphere";
pub const GURARIJ: &str = "gurarij";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsJson {
    pub max_n: usize,
    pub max_m: usize,
    pub max_cells: usize,
    pub eps: String,
    pub grid: String,
    pub cap: String,
    pub tuple_budget: usize,
    pub max_tasks: usize,
    pub max_points: usize,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dim: Option<usize>,
}

impl ParamsJson {
    fn from_params(p: &BuildParams, max_dim: Option<usize>) -> Self {
        let b = &p.bounds;
        ParamsJson {
            max_n: b.max_n,
            max_m: b.max_m,
            max_cells: b.max_cells,
            eps: b.eps.to_string(),
            grid: p.grid.to_string(),
            cap: p.cap.to_string(),
            tuple_budget: b.tuple_budget,
            max_tasks: b.max_tasks,
            max_points: b.max_points,
            seed: p.seed,
            max_dim,
        }
    }

    fn to_params(&self) -> Result<BuildParams, CliError> {
        let bounds = Bounds {
            max_n: self.max_n,
            max_m: self.max_m,
            max_cells: self.max_cells,
            eps: parse_rat(&self.eps)?,
            tuple_budget: self.tuple_budget,
            max_tasks: self.max_tasks,
            max_points: self.max_points,
        };
        Ok(BuildParams {
            bounds,
            grid: parse_rat(&self.grid)?,
            cap: parse_rat(&self.cap)?,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageJson {
    pub task: Option<usize>,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskJson<B, W> {
    pub b: B,
    pub tuple_index: usize,
    pub m: usize,
    pub psi: Vec<Vec<String>>,
    pub target: Option<Vec<Vec<String>>>,
    pub eps: String,
    pub status: String,
    pub witness: Vec<W>,
    pub stage: Option<usize>,
    pub reused: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact<S, B, W> {
    pub class: String,
    pub params: ParamsJson,
    pub space: S,
    pub dense: Vec<W>,
    pub stages: Vec<StageJson>,
    pub tasks: Vec<TaskJson<B, W>>,
}

pub type UrysohnArtifact = Artifact<SpaceJson, SpaceJson, usize>;
pub type GurarijArtifact = Artifact<BanachStageJson, VectorTupleJson, Vec<String>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceJson {
    pub space: NormSpaceJson,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkJson {
    pub piece: usize,
    pub b: Vec<String>,
    pub a: Vec<String>,
    pub w: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisteredJson {
    pub tuple: VectorTupleJson,
    pub images: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BanachStageJson {
    pub dim: usize,
    pub pieces: Vec<PieceJson>,
    pub links: Vec<LinkJson>,
    pub registry: Vec<RegisteredJson>,
}

/// A loaded, re-verified build of either class.
pub enum Loaded {
    Urysohn(UrysohnSphere, UrysohnLimit),
    Gurarij(Gurarij, GurarijLimit),
}

fn matrix_json(m: &ApproxIsometry) -> Vec<Vec<String>> {
    m.rows()
        .iter()
        .map(|r| r.iter().map(RatInf::to_string).collect())
        .collect()
}

fn tasks_json<P, B, W>(
    entries: &[CertificateEntry<P::Tuple, P::Point>],
    tuple: impl Fn(&P::Tuple) -> B,
    point: impl Fn(&P::Point) -> W,
) -> Vec<TaskJson<B, W>>
where
    P: ClassProvider,
{
    entries
        .iter()
        .map(|e| {
            let (status, witness, stage, reused) = match &e.status {
                TaskStatus::Satisfied {
                    images,
                    stage,
                    reused,
                } => (
                    "satisfied",
                    images.iter().map(&point).collect(),
                    Some(*stage),
                    Some(*reused),
                ),
                TaskStatus::Vacuous => ("vacuous", Vec::new(), None, None),
            };
            TaskJson {
                b: tuple(&e.task.tuple),
                tuple_index: e.task.tuple_index,
                m: e.task.m,
                psi: matrix_json(&e.task.psi),
                target: e.task.target.as_ref().map(matrix_json),
                eps: e.task.eps.to_string(),
                status: status.into(),
                witness,
                stage,
                reused,
            }
        })
        .collect()
}

fn stages_json(stages: &[StageRecord]) -> Vec<StageJson> {
    stages
        .iter()
        .map(|s| StageJson {
            task: s.task,
            size: s.size,
        })
        .collect()
}

fn read_matrix(rows: &[Vec<String>], x: Space, y: Space) -> Result<ApproxIsometry, CliError> {
    let values: Vec<Vec<RatInf>> = rows
        .iter()
        .map(|r| r.iter().map(|s| crate::format::parse_rat_inf(s)).collect())
        .collect::<Result<_, _>>()?;
    Ok(metfraisse_core::apx::validate_apx(&values, x, y)?)
}

/// Rebuilds the certificate against the loaded stage and dense sequence.
fn entries_from<P: ClassProvider, B, W>(
    provider: &P,
    stage: &P::Structure,
    dense: &[P::Point],
    tasks: &[TaskJson<B, W>],
    tuple: impl Fn(&B) -> Result<P::Tuple, CliError>,
    point: impl Fn(&W) -> Result<P::Point, CliError>,
) -> Result<Certificate<P>, CliError> {
    tasks
        .iter()
        .enumerate()
        .map(|(k, t)| {
            if t.m > dense.len() {
                return Err(CliError::domain(
                    "InvalidArtifact",
                    format!("task {} refers to {} dense points", k, t.m),
                ));
            }
            let tup = tuple(&t.b)?;
            let x: Space = Arc::new(provider.tuple_space(&tup));
            let y: Space = Arc::new(provider.points_metric(stage, &dense[..t.m], 'a'));
            let psi = read_matrix(&t.psi, x.clone(), y.clone())?;
            let target = t
                .target
                .as_ref()
                .map(|m| read_matrix(m, x, y))
                .transpose()?;
            let task = Task {
                tuple: tup,
                tuple_index: t.tuple_index,
                n: psi.rows_len(),
                m: t.m,
                psi,
                eps: parse_rat(&t.eps)?,
                target,
            };
            let status = match t.status.as_str() {
                "satisfied" => TaskStatus::Satisfied {
                    images: t.witness.iter().map(&point).collect::<Result<_, _>>()?,
                    stage: t.stage.unwrap_or(0),
                    reused: t.reused.unwrap_or(false),
                },
                "vacuous" => TaskStatus::Vacuous,
                other => {
                    return Err(CliError::domain(
                        "InvalidArtifact",
                        format!("unknown task status {:?}", other),
                    ))
                }
            };
            Ok(CertificateEntry { task, status })
        })
        .collect()
}

pub fn urysohn_artifact(limit: &UrysohnLimit) -> UrysohnArtifact {
    Artifact {
        class: URYSOHN.into(),
        params: ParamsJson::from_params(&limit.params, None),
        space: SpaceJson::from_space(&limit.space.to_metric()),
        dense: limit.dense.clone(),
        stages: stages_json(&limit.stages),
        tasks: tasks_json::<UrysohnSphere, _, _>(
            &limit.entries,
            |t| SpaceJson::from_space(t),
            |&p| p,
        ),
    }
}

pub fn urysohn_provider(params: &BuildParams) -> Result<UrysohnSphere, CliError> {
    let grid = params.grid;
    if grid.numer() != 1 || grid.denom() <= 0 || grid.denom() > u32::MAX as i128 {
        return Err(CliError::Usage(format!("grid must be 1/k, got {}", grid)));
    }
    let class = ClassParams::new(params.cap, grid.denom() as u32)?;
    Ok(UrysohnSphere::new(class).with_index_depth(params.bounds.max_m))
}

fn grid_stage(space: &FiniteMetricSpace, provider: &UrysohnSphere) -> GridStage {
    let mut s = provider.empty_structure();
    s.refine_scale(space.scale());
    let scale = s.scale();
    for p in 0..space.len() {
        let row: Vec<i64> = (0..p)
            .map(|q| (space.dist(p, q) * Rat::int(scale)).numer() as i64)
            .collect();
        s.push(row);
    }
    s
}

pub fn load_urysohn(a: &UrysohnArtifact) -> Result<(UrysohnSphere, UrysohnLimit), CliError> {
    let params = a.params.to_params()?;
    let provider = urysohn_provider(&params)?;
    let space = a.space.to_space()?;
    if space.diameter() > params.cap {
        return Err(CliError::domain(
            "InvalidArtifact",
            format!(
                "diameter {} exceeds the cap {}",
                space.diameter(),
                params.cap
            ),
        ));
    }
    let stage = grid_stage(&space, &provider);
    let point = |&p: &usize| {
        if p < stage.len() {
            Ok(p)
        } else {
            Err(CliError::domain(
                "InvalidArtifact",
                format!("point {} out of range", p),
            ))
        }
    };
    let dense: Vec<usize> = a.dense.iter().map(point).collect::<Result<_, _>>()?;
    let entries = entries_from(
        &provider,
        &stage,
        &dense,
        &a.tasks,
        |b| Ok(Arc::new(b.to_space()?)),
        point,
    )?;
    let limit = UrysohnLimit {
        space: stage,
        dense,
        stages: a
            .stages
            .iter()
            .map(|s| StageRecord {
                task: s.task,
                size: s.size,
            })
            .collect(),
        params,
        entries,
    };
    verify_certificate(&provider, &limit)?;
    Ok((provider, limit))
}

pub fn gurarij_artifact(provider: &Gurarij, limit: &GurarijLimit) -> GurarijArtifact {
    let s = &limit.space;
    let space = BanachStageJson {
        dim: s.dim(),
        pieces: s
            .pieces()
            .iter()
            .map(|p| PieceJson {
                space: NormSpaceJson::from_space(&p.space),
                offset: p.offset,
            })
            .collect(),
        links: s
            .links()
            .iter()
            .map(|l| LinkJson {
                piece: l.piece,
                b: rat_row(&l.b),
                a: rat_row(&l.a),
                w: l.w.to_string(),
            })
            .collect(),
        registry: s
            .registry()
            .iter()
            .map(|r| RegisteredJson {
                tuple: VectorTupleJson::from_tuple(&r.tuple),
                images: r.images.iter().map(|v| rat_row(v)).collect(),
            })
            .collect(),
    };
    Artifact {
        class: GURARIJ.into(),
        params: ParamsJson::from_params(&limit.params, Some(provider.params.max_dim)),
        space,
        dense: limit.dense.iter().map(|v| rat_row(v)).collect(),
        stages: stages_json(&limit.stages),
        tasks: tasks_json::<Gurarij, _, _>(&limit.entries, VectorTupleJson::from_tuple, |v| {
            rat_row(v)
        }),
    }
}

pub fn gurarij_provider(params: &BuildParams, max_dim: usize) -> Result<Gurarij, CliError> {
    Ok(Gurarij::new(GurarijParams::new(
        params.grid,
        params.cap,
        max_dim,
    )?))
}

/// The stage is rebuilt without trusting any norm-preservation claim, so
/// every norm is the full linear program.
pub fn load_gurarij(a: &GurarijArtifact) -> Result<(Gurarij, GurarijLimit), CliError> {
    let params = a.params.to_params()?;
    let provider = gurarij_provider(&params, a.params.max_dim.unwrap_or(2))?;
    let pieces = a
        .space
        .pieces
        .iter()
        .map(|p| {
            Ok(Piece {
                space: p.space.to_space()?,
                offset: p.offset,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let links = a
        .space
        .links
        .iter()
        .map(|l| {
            Ok(Link {
                piece: l.piece,
                b: parse_row(&l.b)?,
                a: parse_row(&l.a)?,
                w: parse_rat(&l.w)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let registry = a
        .space
        .registry
        .iter()
        .map(|r| {
            Ok(Registered {
                tuple: r.tuple.to_tuple()?,
                images: parse_rows(&r.images)?,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let stage = BanachStage::from_parts(pieces, links, registry)?;
    if stage.dim() != a.space.dim {
        return Err(CliError::domain(
            "InvalidArtifact",
            format!(
                "stage has dimension {}, artifact says {}",
                stage.dim(),
                a.space.dim
            ),
        ));
    }
    let dim = stage.dim();
    let point = |v: &Vec<String>| {
        let v = parse_row(v)?;
        if v.len() == dim {
            Ok(v)
        } else {
            Err(CliError::domain(
                "InvalidArtifact",
                format!("vector of length {} in dimension {}", v.len(), dim),
            ))
        }
    };
    let dense: Vec<Vec<Rat>> = a.dense.iter().map(point).collect::<Result<_, _>>()?;
    let entries = entries_from(&provider, &stage, &dense, &a.tasks, |b| b.to_tuple(), point)?;
    let limit = GurarijLimit {
        space: stage,
        dense,
        stages: a
            .stages
            .iter()
            .map(|s| StageRecord {
                task: s.task,
                size: s.size,
            })
            .collect(),
        params,
        entries,
    };
    verify_certificate(&provider, &limit)?;
    Ok((provider, limit))
}

#[derive(Deserialize)]
struct ClassTag {
    class: String,
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    Ok(serde_json::from_str(text)?)
}

/// Parses and re-verifies an artifact of either class.
pub fn load(text: &str) -> Result<Loaded, CliError> {
    let tag: ClassTag = parse(text)?;
    match tag.class.as_str() {
        URYSOHN => {
            let (p, l) = load_urysohn(&parse(text)?)?;
            Ok(Loaded::Urysohn(p, l))
        }
        GURARIJ => {
            let (p, l) = load_gurarij(&parse(text)?)?;
            Ok(Loaded::Gurarij(p, l))
        }
        other => Err(CliError::Usage(format!("unknown class {:?}", other))),
    }
}
