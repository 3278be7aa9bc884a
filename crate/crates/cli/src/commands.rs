use std::fs;
use std::path::Path;
use std::sync::Arc;

use metfraisse_core::amalgam::{dk_metric, ClassParams};
use metfraisse_core::apx::{
    compose, extract_map, pseudo_inverse, strictly_refines, trivial_extension, Space,
};
use metfraisse_core::banach::{dk_banach, gurarij_check, LinearMap};
use metfraisse_core::engine::backforth::{
    back_and_forth, homogeneity_check, InitialConstraint, Side,
};
use metfraisse_core::engine::check::{check_extension_property, ExtensionWitness, MetricPoints};
use metfraisse_core::engine::{build_limit, Bounds, BuildParams, GenericSeed};
use metfraisse_core::metric::{FiniteMetricSpace, PointTuple};
use metfraisse_core::Rat;
use serde::{Deserialize, Serialize};

use crate::artifact::{self, Loaded};
use crate::cli::{
    ApxCommand, BfArgs, BuildArgs, BuildClass, CheckArgs, CheckKind, Command, DkArgs, DkClass,
};
use crate::error::CliError;
use crate::format::{
    parse_rat, parse_row, parse_rows, rat_row, ApxJson, NormSpaceJson, PointTupleJson, SpaceJson,
    VectorTupleJson,
};

/// A command's result JSON and whether it passed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub json: String,
    pub pass: bool,
}

impl Output {
    fn pass<T: Serialize>(value: &T) -> Self {
        Output {
            json: to_json(value),
            pass: true,
        }
    }

    fn with<T: Serialize>(value: &T, pass: bool) -> Self {
        Output {
            json: to_json(value),
            pass,
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e)))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Usage(format!("{}: malformed JSON: {}", path.display(), e)))
}

pub fn execute(command: &Command) -> Result<Output, CliError> {
    match command {
        Command::Apx(c) => apx(c),
        Command::Dk(a) => dk(a),
        Command::Build(a) => build(a),
        Command::Check(a) => check(a),
        Command::Bf(a) => bf(a),
    }
}

#[derive(Serialize)]
struct Validated {
    valid: bool,
    rows: usize,
    cols: usize,
    finite: bool,
}

#[derive(Serialize)]
struct Margin {
    margin: Option<String>,
}

fn apx(c: &ApxCommand) -> Result<Output, CliError> {
    match c {
        ApxCommand::Validate { file } => {
            let psi = read_json::<ApxJson>(file)?.to_apx()?;
            Ok(Output::pass(&Validated {
                valid: true,
                rows: psi.rows_len(),
                cols: psi.cols_len(),
                finite: psi.is_all_finite(),
            }))
        }
        ApxCommand::Compose { psi, phi } => {
            let psi = read_json::<ApxJson>(psi)?.to_apx()?;
            let phi = read_json::<ApxJson>(phi)?.to_apx()?;
            Ok(Output::pass(&ApxJson::from_apx(&compose(&psi, &phi)?)))
        }
        ApxCommand::Inverse { psi } => {
            let psi = read_json::<ApxJson>(psi)?.to_apx()?;
            Ok(Output::pass(&ApxJson::from_apx(&pseudo_inverse(&psi))))
        }
        ApxCommand::Extend {
            psi,
            source,
            target,
            rows,
            cols,
        } => {
            let psi = read_json::<ApxJson>(psi)?.to_apx()?;
            let x: Space = Arc::new(read_json::<SpaceJson>(source)?.to_space()?);
            let y: Space = Arc::new(read_json::<SpaceJson>(target)?.to_space()?);
            Ok(Output::pass(&ApxJson::from_apx(&trivial_extension(
                &psi, x, y, rows, cols,
            )?)))
        }
        ApxCommand::Refines { phi, psi } => {
            let phi = read_json::<ApxJson>(phi)?.to_apx()?;
            let psi = read_json::<ApxJson>(psi)?.to_apx()?;
            let w = strictly_refines(&phi, &psi)?;
            let pass = w.is_some();
            Ok(Output::with(
                &Margin {
                    margin: w.map(|w| w.margin.to_string()),
                },
                pass,
            ))
        }
    }
}

fn class_params(cap: Rat, grid: Rat) -> Result<ClassParams, CliError> {
    if grid.numer() != 1 || grid.denom() > u32::MAX as i128 {
        return Err(CliError::Usage(format!("grid must be 1/k, got {}", grid)));
    }
    Ok(ClassParams::new(cap, grid.denom() as u32)?)
}

fn dk(a: &DkArgs) -> Result<Output, CliError> {
    let value = match a.class {
        DkClass::Metric => {
            let ta: PointTupleJson = read_json(&a.a)?;
            let tb: PointTupleJson = read_json(&a.b)?;
            let (sa, sb) = (ta.space.to_space()?, tb.space.to_space()?);
            let pa = PointTuple::new(&sa, ta.indices.clone())?;
            let pb = PointTuple::new(&sb, tb.indices.clone())?;
            dk_metric(&pa, &pb, &class_params(a.cap, a.grid)?)?
        }
        DkClass::Banach => {
            let ta = read_json::<VectorTupleJson>(&a.a)?.to_tuple()?;
            let tb = read_json::<VectorTupleJson>(&a.b)?.to_tuple()?;
            dk_banach(&ta, &tb)?
        }
    };
    Ok(Output::pass(&value.to_string()))
}

pub fn build_params(a: &BuildArgs) -> BuildParams {
    let cap = a.cap.unwrap_or(match a.class {
        BuildClass::UrysohnSphere => Rat::ONE,
        BuildClass::Gurarij => Rat::int(2),
    });
    let mut bounds = Bounds::new(a.max_n, a.max_m, a.eps);
    if let Some(c) = a.max_cells {
        bounds = bounds.with_max_cells(c);
    }
    if let Some(t) = a.tuple_budget {
        bounds.tuple_budget = t;
    }
    if let Some(p) = a.max_points {
        bounds.max_points = p;
    }
    if let Some(t) = a.max_tasks {
        bounds.max_tasks = t;
    }
    BuildParams {
        bounds,
        grid: a.grid,
        cap,
        seed: (a.seed > 0).then_some(a.seed),
    }
}

/// Runs a build and returns its artifact JSON.
pub fn build(a: &BuildArgs) -> Result<Output, CliError> {
    let params = build_params(a);
    let seed = params.seed.map(GenericSeed);
    let json = match a.class {
        BuildClass::UrysohnSphere => {
            let p = artifact::urysohn_provider(&params)?;
            let limit = build_limit(&p, &params.bounds, seed)?;
            to_json(&artifact::urysohn_artifact(&limit))
        }
        BuildClass::Gurarij => {
            let p = artifact::gurarij_provider(&params, a.max_dim)?;
            let limit = build_limit(&p, &params.bounds, seed)?;
            to_json(&artifact::gurarij_artifact(&p, &limit))
        }
    };
    Ok(Output { json, pass: true })
}

#[derive(Serialize)]
struct CertificateReport {
    pass: bool,
    class: &'static str,
    points: usize,
    dense: usize,
    tasks: usize,
    satisfied: usize,
    vacuous: usize,
}

#[derive(Serialize)]
struct WitnessJson {
    subset: Vec<usize>,
    values: Vec<String>,
    point: Option<usize>,
    error: String,
}

impl WitnessJson {
    fn new(w: &ExtensionWitness) -> Self {
        WitnessJson {
            subset: w.subset.clone(),
            values: rat_row(&w.values),
            point: w.point,
            error: w.error.to_string(),
        }
    }
}

#[derive(Serialize)]
struct ExtensionJson {
    pass: bool,
    prefix: usize,
    size: usize,
    grid: String,
    eps: String,
    subsets: usize,
    checked: usize,
    passed: usize,
    failed: usize,
    worst: Option<WitnessJson>,
    failures: Vec<WitnessJson>,
}

#[derive(Serialize)]
struct HomogeneityJson {
    pass: bool,
    eps: String,
    r: String,
    c: String,
    delta: Option<String>,
    steps: usize,
    pairs: Vec<(usize, usize)>,
}

/// A vector of the limit, by coordinates or as a dense point.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum VectorRef {
    Dense { dense: usize },
    Coords(Vec<String>),
}

#[derive(Debug, Deserialize)]
struct GurarijFixture {
    e: NormSpaceJson,
    f: NormSpaceJson,
    /// Columns: images in `F` of the basis of `E`.
    iota: Vec<Vec<String>>,
    psi: Vec<VectorRef>,
}

#[derive(Serialize)]
struct GurarijJson {
    pass: bool,
    eps: String,
    images: Vec<Vec<String>>,
    errors: Vec<String>,
    distortion: (String, String),
    copy: Option<usize>,
    negated: bool,
}

fn parse_map(pairs: &[String], dense: &[usize]) -> Result<Vec<(usize, usize)>, CliError> {
    pairs
        .iter()
        .map(|s| {
            let (x, y) = s
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("map entry {:?} is not x:y", s)))?;
            let idx = |t: &str| -> Result<usize, CliError> {
                let k: usize = t
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("bad index {:?}", t)))?;
                dense
                    .get(k)
                    .copied()
                    .ok_or_else(|| CliError::Usage(format!("dense index {} out of range", k)))
            };
            Ok((idx(x)?, idx(y)?))
        })
        .collect()
}

fn check(a: &CheckArgs) -> Result<Output, CliError> {
    let loaded = artifact::load(&read(&a.build)?)?;
    match (a.what, loaded) {
        (CheckKind::Certificate, l) => {
            let report = match &l {
                Loaded::Urysohn(_, m) => CertificateReport {
                    pass: true,
                    class: artifact::URYSOHN,
                    points: m.space.len(),
                    dense: m.dense.len(),
                    tasks: m.entries.len(),
                    satisfied: m.satisfied(),
                    vacuous: m.vacuous(),
                },
                Loaded::Gurarij(_, m) => CertificateReport {
                    pass: true,
                    class: artifact::GURARIJ,
                    points: m.space.dim(),
                    dense: m.dense.len(),
                    tasks: m.entries.len(),
                    satisfied: m.satisfied(),
                    vacuous: m.vacuous(),
                },
            };
            Ok(Output::pass(&report))
        }
        (CheckKind::Extension, Loaded::Urysohn(_, m)) => {
            let grid = a.grid.unwrap_or(m.params.grid);
            let eps = a.eps.unwrap_or(m.params.bounds.eps);
            let prefix = a.prefix.unwrap_or_else(|| m.certified_prefix());
            let r = check_extension_property(&m.space, prefix, a.size, grid, m.params.cap, eps);
            let report = ExtensionJson {
                pass: r.ok(),
                prefix,
                size: a.size,
                grid: grid.to_string(),
                eps: eps.to_string(),
                subsets: r.subsets,
                checked: r.checked,
                passed: r.passed,
                failed: r.failed(),
                worst: r.worst.as_ref().map(WitnessJson::new),
                failures: r.failures.iter().map(WitnessJson::new).collect(),
            };
            Ok(Output::with(&report, r.ok()))
        }
        (CheckKind::Homogeneity, Loaded::Urysohn(_, m)) => {
            let eps = a.eps.unwrap_or(Rat::new(1, 4));
            let f = parse_map(&a.map, &m.dense)?;
            let h = homogeneity_check(&m.space, &f, eps, a.steps)?;
            let report = HomogeneityJson {
                pass: h.success,
                eps: eps.to_string(),
                r: h.r.to_string(),
                c: h.state.c.to_string(),
                delta: h.state.delta.map(|d| d.to_string()),
                steps: h.state.steps.len(),
                pairs: h.state.pairs.clone(),
            };
            Ok(Output::with(&report, h.success))
        }
        (CheckKind::Gurarij, Loaded::Gurarij(_, g)) => {
            let eps = a.eps.unwrap_or(Rat::new(1, 4));
            let path = a
                .fixture
                .as_ref()
                .ok_or_else(|| CliError::Usage("check gurarij needs --fixture".into()))?;
            let fx: GurarijFixture = read_json(path)?;
            let e = fx.e.to_space()?;
            let f = fx.f.to_space()?;
            let iota = LinearMap::from_columns(f.dim(), &parse_rows(&fx.iota)?);
            let psi: Vec<Vec<Rat>> = fx
                .psi
                .iter()
                .map(|v| match v {
                    VectorRef::Dense { dense } => g.dense.get(*dense).cloned().ok_or_else(|| {
                        CliError::Usage(format!("dense index {} out of range", dense))
                    }),
                    VectorRef::Coords(c) => parse_row(c),
                })
                .collect::<Result<_, _>>()?;
            if iota.source_dim() != e.dim() {
                return Err(CliError::Usage(format!(
                    "iota has {} columns for dim E = {}",
                    iota.source_dim(),
                    e.dim()
                )));
            }
            let ext = gurarij_check(&g, &e, &f, &iota, &psi, eps)?;
            Ok(Output::pass(&GurarijJson {
                pass: true,
                eps: eps.to_string(),
                images: ext.images.iter().map(|v| rat_row(v)).collect(),
                errors: rat_row(&ext.errors),
                distortion: (
                    ext.distortion.lower.to_string(),
                    ext.distortion.upper.to_string(),
                ),
                copy: ext.copy,
                negated: ext.negated,
            }))
        }
        (what, _) => Err(CliError::Usage(
            format!("check {:?} does not apply to this class", what).to_lowercase(),
        )),
    }
}

/// The left or right side of a back-and-forth run: a build's space and dense
/// sequence, or a plain metric space.
enum BfSide {
    Build(Box<metfraisse_core::engine::urysohn::UrysohnLimit>),
    Space(FiniteMetricSpace),
}

impl BfSide {
    fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        let v: serde_json::Value = serde_json::from_str(&text)?;
        if v.get("class").is_some() {
            match artifact::load(&text)? {
                Loaded::Urysohn(_, l) => Ok(BfSide::Build(Box::new(l))),
                Loaded::Gurarij(..) => Err(CliError::Usage(
                    "back-and-forth runs on metric builds".into(),
                )),
            }
        } else {
            Ok(BfSide::Space(
                serde_json::from_value::<SpaceJson>(v)?.to_space()?,
            ))
        }
    }

    fn points(&self) -> &dyn MetricPoints {
        match self {
            BfSide::Build(l) => &l.space,
            BfSide::Space(s) => s,
        }
    }

    fn dense(&self) -> Vec<usize> {
        match self {
            BfSide::Build(l) => l.dense.clone(),
            BfSide::Space(s) => (0..s.len()).collect(),
        }
    }

    fn metric(&self) -> FiniteMetricSpace {
        match self {
            BfSide::Build(l) => l.space.to_metric(),
            BfSide::Space(s) => s.clone(),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Psi0 {
    Coarsened {
        pairs: Vec<(usize, usize)>,
        slack: String,
    },
    Matrix {
        cols: Vec<usize>,
        apx: ApxJson,
    },
}

#[derive(Serialize)]
struct StepJson {
    side: &'static str,
    point: Option<usize>,
    pair: Option<(usize, usize)>,
    c: String,
    delta: String,
}

#[derive(Serialize)]
struct BfJson {
    r: String,
    c: String,
    delta: Option<String>,
    pairs: Vec<(usize, usize)>,
    correspondence: Option<Vec<(usize, usize)>>,
    prefix: usize,
    bijective_on_prefix: bool,
    rows: Vec<usize>,
    cols: Vec<usize>,
    steps: Vec<StepJson>,
    theta: ApxJson,
}

fn bf(a: &BfArgs) -> Result<Output, CliError> {
    let left = BfSide::load(&a.m)?;
    let right = BfSide::load(&a.n)?;
    let init = match (&a.psi0, a.empty) {
        (None, true) => InitialConstraint::Empty,
        (Some(p), false) => match read_json::<Psi0>(p)? {
            Psi0::Coarsened { pairs, slack } => InitialConstraint::Coarsened {
                pairs,
                slack: parse_rat(&slack)?,
            },
            Psi0::Matrix { cols, apx } => {
                let x: Space = Arc::new(left.metric());
                let y: Space = Arc::new(right.metric().subspace(&cols)?);
                InitialConstraint::Matrix {
                    cols,
                    psi: apx.to_apx_over(x, y)?,
                }
            }
        },
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --psi0 and --empty".into(),
            ))
        }
    };
    let state = back_and_forth(left.points(), right.points(), &init, a.steps, a.reserve)?;
    let r = state.r();
    let (ld, rd) = (left.dense(), right.dense());
    let k = a.prefix.min(ld.len()).min(rd.len());
    let bijective_on_prefix = r
        .finite()
        .is_some_and(|r| state.r_bijective_on(&ld[..k], &rd[..k], r));
    let correspondence = r
        .finite()
        .and_then(|r| extract_map(state.theta(), r).ok())
        .map(|m| {
            m.into_iter()
                .map(|(i, j)| (state.rows[i], state.cols[j]))
                .collect()
        });
    let report = BfJson {
        r: r.to_string(),
        c: state.c.to_string(),
        delta: state.delta.map(|d| d.to_string()),
        pairs: state.pairs.clone(),
        correspondence,
        prefix: k,
        bijective_on_prefix,
        rows: state.rows.clone(),
        cols: state.cols.clone(),
        steps: state
            .steps
            .iter()
            .map(|s| StepJson {
                side: match s.side {
                    Side::Forth => "forth",
                    Side::Back => "back",
                },
                point: s.point,
                pair: s.pair,
                c: s.c.to_string(),
                delta: s.delta.to_string(),
            })
            .collect(),
        theta: ApxJson::from_apx(state.theta()),
    };
    Ok(Output::pass(&report))
}
