//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with the
//! measured values and the wall time against its budget.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use metfraisse::artifact::{self, Loaded};
use metfraisse::run;
use metfraisse_core::amalgam::{amalgam_from_apx, dk_metric, dk_triangle_check, ClassParams};
use metfraisse_core::apx::{
    compose, from_partial, pseudo_inverse, ApproxIsometry, PartialIsometry, Space,
};
use metfraisse_core::banach::{banach_amalgamate, dk_banach, PolytopalNormSpace, VectorTuple};
use metfraisse_core::engine::backforth::homogeneity_check;
use metfraisse_core::metric::{validate_metric, FiniteMetricSpace, PointTuple};
use metfraisse_core::sample::{
    random_apx, random_metric, random_partial_isometry, random_polytopal, random_vector_tuple,
    shared,
};
use metfraisse_core::{Rat, RatInf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

/// Back-and-forth `r` recorded for the two-seed run; larger values fail.
const BF_BASELINE: (i128, i128) = (33, 256);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

fn mf(args: &[&str]) -> metfraisse::Run {
    let mut argv = vec!["metfraisse"];
    argv.extend_from_slice(args);
    run(argv)
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn json(r: &metfraisse::Run) -> Value {
    serde_json::from_str(&r.stdout).unwrap_or(Value::Null)
}

fn q(n: i128, d: i128) -> Rat {
    Rat::new(n, d)
}

// ---------------------------------------------------------------- calculus

fn minplus(psi: &ApproxIsometry, phi: &ApproxIsometry) -> Vec<Vec<RatInf>> {
    (0..psi.rows_len())
        .map(|x| {
            (0..phi.cols_len())
                .map(|z| {
                    (0..psi.cols_len())
                        .map(|y| psi.get(x, y) + phi.get(y, z))
                        .min()
                        .unwrap_or(RatInf::Inf)
                })
                .collect()
        })
        .collect()
}

fn partial_oracle(f: &PartialIsometry) -> Vec<Vec<RatInf>> {
    let (x, y) = (f.source(), f.target());
    (0..x.len())
        .map(|a| {
            (0..y.len())
                .map(|b| {
                    f.pairs()
                        .iter()
                        .map(|&(z, fz)| RatInf::Fin(x.dist(a, z) + y.dist(fz, b)))
                        .min()
                        .unwrap_or(RatInf::Inf)
                })
                .collect()
        })
        .collect()
}

fn space(rng: &mut ChaCha8Rng, den: i128, max_units: i128) -> Space {
    let n = rng.gen_range(1..=8);
    shared(random_metric(rng, n, den, max_units))
}

fn calculus_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut cases, mut functorial, mut bad) = (0, 0, Vec::new());
    for case in 0..1000 {
        let den = rng.gen_range(1..=8);
        let (w, x, y, z) = (
            space(&mut rng, den, 2 * den),
            space(&mut rng, den, 2 * den),
            space(&mut rng, den, 2 * den),
            space(&mut rng, den, 2 * den),
        );
        let a = random_apx(&mut rng, &w, &x, den);
        let b = random_apx(&mut rng, &x, &y, den);
        let c = random_apx(&mut rng, &y, &z, den);
        let ab = compose(&a, &b).unwrap();
        let mut ok = ab.validate().is_ok() && ab.rows() == minplus(&a, &b);
        let inv = pseudo_inverse(&a);
        ok &= inv.validate().is_ok()
            && (0..a.rows_len()).all(|i| (0..a.cols_len()).all(|j| inv.get(j, i) == a.get(i, j)));
        ok &= compose(&ab, &c).unwrap() == compose(&a, &compose(&b, &c).unwrap()).unwrap();
        ok &= pseudo_inverse(&inv) == a;
        ok &= pseudo_inverse(&ab) == compose(&pseudo_inverse(&b), &inv).unwrap();
        ok &= compose(&ApproxIsometry::identity(w.clone()), &a).unwrap() == a;
        ok &= compose(&a, &ApproxIsometry::identity(x.clone())).unwrap() == a;
        ok &= compose(&a, &ApproxIsometry::empty(x.clone(), y.clone()))
            .unwrap()
            .is_all_infinite();
        ok &= compose(&ApproxIsometry::empty(z.clone(), w.clone()), &a)
            .unwrap()
            .is_all_infinite();

        // Partial isometries need repeated distances to be plentiful.
        let (px, py, pz) = (
            space(&mut rng, den, 2),
            space(&mut rng, den, 2),
            space(&mut rng, den, 2),
        );
        let extra = rng.gen_range(0..=3);
        if let Some(f) = random_partial_isometry(&mut rng, &px, &py, &[], extra) {
            ok &= from_partial(&f).rows() == partial_oracle(&f);
            let img: Vec<usize> = f.pairs().iter().map(|p| p.1).collect();
            let g = if rng.gen_bool(0.5) {
                let extra = rng.gen_range(0..=2);
                random_partial_isometry(&mut rng, &py, &pz, &img, extra)
            } else {
                let k = rng.gen_range(0..=img.len());
                random_partial_isometry(&mut rng, &py, &pz, &img[..k], 0)
            };
            if let Some(g) = g {
                let gf = f.then(&g).unwrap();
                ok &= compose(&from_partial(&f), &from_partial(&g)).unwrap() == from_partial(&gf);
                ok &= from_partial(&gf).rows() == partial_oracle(&gf);
                functorial += 1;
            }
        }
        cases += 1;
        if !ok {
            bad.push(case);
        }
    }
    Outcome::new(
        bad.is_empty(),
        format!(
            "{} cases, {} partial-map compositions, failing cases {:?}",
            cases, functorial, bad
        ),
    )
}

// ------------------------------------------------------------- amalgamation

fn amalgam_validity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut done, mut bad) = ([0usize; 2], 0usize);
    while done.iter().any(|&d| d < 250) {
        let capped = done[0] >= 250;
        let den = rng.gen_range(1..=8);
        let max_units = if capped { den } else { 2 * den };
        let x = space(&mut rng, den, max_units);
        let y = space(&mut rng, den, max_units);
        let psi = random_apx(&mut rng, &x, &y, den);
        if !psi.is_all_finite() {
            continue;
        }
        let cap = capped.then_some(Rat::ONE);
        let am = amalgam_from_apx(&psi, cap).unwrap();
        let realized = am.realized(x.clone(), y.clone());
        let contract =
            (0..x.len()).all(|i| (0..y.len()).all(|j| realized.get(i, j) <= psi.get(i, j)));
        if validate_metric(&am.space.rows()).is_err() || !contract {
            bad += 1;
        }
        done[capped as usize] += 1;
    }
    Outcome::new(
        bad == 0,
        format!(
            "{} uncapped and {} capped amalgams, {} invalid",
            done[0], done[1], bad
        ),
    )
}

// ------------------------------------------------------------ intrinsic d^K

/// A tuple of `n` points up to isometry: the pseudometric on positions,
/// in units of `1/g`.
#[derive(Clone)]
struct TupleType {
    d: Vec<Vec<i64>>,
    space: FiniteMetricSpace,
    indices: Vec<usize>,
    /// Distances between the distinct points, in units of `1/(2g)`.
    distinct: Vec<Vec<i64>>,
}

fn tuple_types(n: usize, g: i64) -> Vec<TupleType> {
    let cells: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    let total = (g + 1).pow(cells.len() as u32);
    for code in 0..total {
        let mut d = vec![vec![0i64; n]; n];
        let mut c = code;
        for &(i, j) in &cells {
            d[i][j] = c % (g + 1);
            d[j][i] = d[i][j];
            c /= g + 1;
        }
        let triangle = (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| d[i][j] <= d[i][k] + d[k][j])));
        if !triangle {
            continue;
        }
        let mut reps: Vec<usize> = Vec::new();
        let indices: Vec<usize> = (0..n)
            .map(|i| match reps.iter().position(|&r| d[r][i] == 0) {
                Some(k) => k,
                None => {
                    reps.push(i);
                    reps.len() - 1
                }
            })
            .collect();
        let rows: Vec<Vec<Rat>> = reps
            .iter()
            .map(|&i| {
                reps.iter()
                    .map(|&j| q(d[i][j] as i128, g as i128))
                    .collect()
            })
            .collect();
        let space = FiniteMetricSpace::unlabeled(&rows).expect("a metric");
        let distinct = reps
            .iter()
            .map(|&i| reps.iter().map(|&j| 2 * d[i][j]).collect())
            .collect();
        out.push(TupleType {
            d,
            space,
            indices,
            distinct,
        });
    }
    out
}

/// Exhaustive search over bi-Katětov matrices between the generated spaces
/// with entries in `{0, step, 2·step, …} ∩ [0, cap]`, minimizing the largest
/// entry at the matched positions.
struct Oracle<'a> {
    da: &'a [Vec<i64>],
    db: &'a [Vec<i64>],
    cells: Vec<(usize, usize)>,
    objective: usize,
    cap: i64,
    step: i64,
    value: Vec<Vec<i64>>,
    best: i64,
}

impl Oracle<'_> {
    fn fits(&self, k: usize, i: usize, j: usize, v: i64) -> bool {
        self.cells[..k].iter().all(|&(i2, j2)| {
            let w = self.value[i2][j2];
            if i2 == i {
                let d = self.db[j][j2];
                (v - w).abs() <= d && d <= v + w
            } else if j2 == j {
                let d = self.da[i][i2];
                (v - w).abs() <= d && d <= v + w
            } else {
                true
            }
        })
    }

    fn search(&mut self, k: usize, worst: i64) {
        if k == self.cells.len() {
            self.best = self.best.min(worst);
            return;
        }
        let (i, j) = self.cells[k];
        let mut v = 0;
        while v <= self.cap {
            let w = if k < self.objective {
                worst.max(v)
            } else {
                worst
            };
            if w >= self.best {
                break;
            }
            if self.fits(k, i, j, v) {
                self.value[i][j] = v;
                self.search(k + 1, w);
            }
            v += self.step;
        }
    }
}

fn tuple(t: &TupleType) -> PointTuple<'_> {
    PointTuple::new(&t.space, t.indices.clone()).unwrap()
}

fn oracle(a: &TupleType, b: &TupleType, cap: i64, step: i64) -> i64 {
    let (ka, kb) = (a.distinct.len(), b.distinct.len());
    let mut cells: Vec<(usize, usize)> = Vec::new();
    for (&i, &j) in a.indices.iter().zip(&b.indices) {
        if !cells.contains(&(i, j)) {
            cells.push((i, j));
        }
    }
    let objective = cells.len();
    for i in 0..ka {
        for j in 0..kb {
            if !cells.contains(&(i, j)) {
                cells.push((i, j));
            }
        }
    }
    // The constant matrix `cap` is always bi-Katětov.
    let mut o = Oracle {
        da: &a.distinct,
        db: &b.distinct,
        cells,
        objective,
        cap,
        step,
        value: vec![vec![0; kb]; ka],
        best: cap + 1,
    };
    o.search(0, 0);
    o.best.min(cap)
}

fn dk_oracle() -> Outcome {
    let (
        mut pairs,
        mut mismatches,
        mut coarse_off,
        mut closed_off,
        mut asym,
        mut kernel_bad,
        mut tri_bad,
        mut triples,
    ) = (
        0usize, 0usize, 0usize, 0usize, 0usize, 0usize, 0usize, 0usize,
    );
    for g in 1..=4i64 {
        let params = ClassParams::sphere(g as u32);
        let cap = 2 * g;
        for n in 1..=3 {
            let types = tuple_types(n, g);

            let table: Vec<Vec<Rat>> = types
                .iter()
                .map(|a| {
                    types
                        .iter()
                        .map(|b| dk_metric(&tuple(a), &tuple(b), &params).unwrap())
                        .collect()
                })
                .collect();
            for (ia, a) in types.iter().enumerate() {
                for (ib, b) in types.iter().enumerate() {
                    let lp = table[ia][ib];
                    if lp != table[ib][ia] {
                        asym += 1;
                    }
                    if (lp == Rat::ZERO) != (a.d == b.d) {
                        kernel_bad += 1;
                    }
                    if ib < ia {
                        continue;
                    }
                    pairs += 1;
                    if lp != q(oracle(a, b, cap, 1) as i128, cap as i128) {
                        mismatches += 1;
                    }
                    if lp != q(oracle(a, b, cap, 2) as i128, cap as i128) {
                        coarse_off += 1;
                    }
                    let gap = (0..n)
                        .flat_map(|i| (0..n).map(move |j| (i, j)))
                        .map(|(i, j)| (a.d[i][j] - b.d[i][j]).abs())
                        .max()
                        .unwrap();
                    if lp != q(gap as i128, cap as i128) {
                        closed_off += 1;
                    }
                }
            }
            for x in 0..types.len() {
                for y in 0..types.len() {
                    for z in 0..types.len() {
                        triples += 1;
                        if table[x][z] > table[x][y] + table[y][z] {
                            tri_bad += 1;
                        }
                    }
                }
            }
            // The library check on a stride of the same triples.
            for x in (0..types.len()).step_by(7) {
                for y in (0..types.len()).step_by(5) {
                    let z = (x + y) % types.len();
                    if !dk_triangle_check(
                        &tuple(&types[x]),
                        &tuple(&types[y]),
                        &tuple(&types[z]),
                        &params,
                    )
                    .unwrap()
                    {
                        tri_bad += 1;
                    }
                }
            }
        }
    }
    let pass = mismatches == 0 && asym == 0 && kernel_bad == 0 && tri_bad == 0;
    Outcome::new(
        pass,
        format!(
            "{} pairs, {} LP/oracle mismatches; {} asymmetric, {} kernel violations, {} triangle violations over {} triples; \
             1/g-grid oracle differs on {} pairs, half-max-gap formula on {}",
            pairs, mismatches, asym, kernel_bad, tri_bad, triples, coarse_off, closed_off
        ),
    )
}

// ------------------------------------------------------------ sphere builds

struct Builds {
    dir: PathBuf,
}

const SPHERE: [&str; 11] = [
    "build",
    "urysohn-sphere",
    "--grid",
    "1/4",
    "--max-n",
    "3",
    "--max-m",
    "6",
    "--max-cells",
    "4",
    "--eps",
];

impl Builds {
    fn sphere(&self, seed: &str, tag: &str) -> Result<PathBuf, String> {
        let out = self.dir.join(format!("sphere-{}-{}.json", seed, tag));
        let mut args = SPHERE.to_vec();
        args.extend_from_slice(&["1/8", "--seed", seed, "--out", s(&out)]);
        let r = mf(&args);
        if r.code != 0 {
            return Err(format!("build exited {}: {}{}", r.code, r.stdout, r.stderr));
        }
        Ok(out)
    }

    fn gurarij(&self, tag: &str) -> Result<PathBuf, String> {
        let out = self.dir.join(format!("gurarij-{}.json", tag));
        let r = mf(&[
            "build",
            "gurarij",
            "--grid",
            "1/2",
            "--cap",
            "2",
            "--max-n",
            "2",
            "--max-m",
            "1",
            "--eps",
            "1/8",
            "--tuple-budget",
            "2",
            "--seed",
            "0",
            "--out",
            s(&out),
        ]);
        if r.code != 0 {
            return Err(format!("build exited {}: {}{}", r.code, r.stdout, r.stderr));
        }
        Ok(out)
    }
}

fn extension_report(build: &Path) -> metfraisse::Run {
    mf(&[
        "check",
        "extension",
        s(build),
        "--size",
        "3",
        "--grid",
        "1/4",
        "--eps",
        "1/8",
    ])
}

fn limit_criterion(b: &Builds) -> Outcome {
    let path = match b.sphere("0", "a") {
        Ok(p) => p,
        Err(e) => return Outcome::new(false, e),
    };
    let r = extension_report(&path);
    let v = json(&r);
    let pass = r.code == 0 && v["failed"] == 0 && v["checked"].as_u64().unwrap_or(0) > 0;
    let cert = json(&mf(&["check", "certificate", s(&path)]));
    Outcome::new(
        pass,
        format!(
            "{} points, {} tasks; {} extension problems over {} subsets of the first {} points, {} failures",
            cert["points"], cert["tasks"], v["checked"], v["subsets"], v["prefix"], v["failed"]
        ),
    )
}

/// Partial isometries between subsets of at most two of `points`.
fn small_partial_isometries(
    m: &impl Fn(usize, usize) -> Rat,
    points: &[usize],
) -> Vec<Vec<(usize, usize)>> {
    let mut maps = vec![Vec::new()];
    for &x in points {
        for &y in points {
            maps.push(vec![(x, y)]);
        }
    }
    for (i, &x1) in points.iter().enumerate() {
        for &x2 in &points[i + 1..] {
            for &y1 in points {
                for &y2 in points {
                    if y1 != y2 && m(x1, x2) == m(y1, y2) {
                        maps.push(vec![(x1, y1), (x2, y2)]);
                    }
                }
            }
        }
    }
    maps
}

/// A partial map, whether its extension succeeded, and the achieved `r`.
type HomogeneityRow = (Vec<(usize, usize)>, bool, RatInf);

fn homogeneity_results(path: &Path) -> Result<Vec<HomogeneityRow>, String> {
    let text = fs::read_to_string(path).map_err(|e| e.to_string())?;
    let limit = match artifact::load(&text).map_err(|e| e.to_string())? {
        Loaded::Urysohn(_, l) => l,
        Loaded::Gurarij(..) => return Err("not a sphere build".into()),
    };
    let first: Vec<usize> = limit.dense.iter().copied().take(6).collect();
    let maps = small_partial_isometries(&|p, q| limit.space.dist(p, q), &first);
    maps.into_iter()
        .map(|f| {
            let h = homogeneity_check(&limit.space, &f, q(1, 4), None)
                .map_err(|e| format!("{:?}: {}", f, e))?;
            Ok((f, h.success, h.r))
        })
        .collect()
}

fn homogeneity(b: &Builds) -> Outcome {
    let path = b.dir.join("sphere-0-a.json");
    match homogeneity_results(&path) {
        Ok(res) => {
            let failed: Vec<_> = res.iter().filter(|r| !r.1).map(|r| r.0.clone()).collect();
            let worst = res.iter().map(|r| r.2).max().unwrap_or(RatInf::ZERO);
            Outcome::new(
                failed.is_empty(),
                format!(
                    "{} partial isometries, worst r = {}, failing {:?}",
                    res.len(),
                    worst,
                    failed
                ),
            )
        }
        Err(e) => Outcome::new(false, e),
    }
}

fn bf_report(a: &Path, b: &Path) -> metfraisse::Run {
    mf(&[
        "bf",
        s(a),
        s(b),
        "--empty",
        "--steps",
        "8",
        "--reserve",
        "1/8",
        "--prefix",
        "4",
    ])
}

fn back_and_forth(b: &Builds) -> Outcome {
    let other = match b.sphere("7", "a") {
        Ok(p) => p,
        Err(e) => return Outcome::new(false, e),
    };
    let base = b.dir.join("sphere-0-a.json");
    let differ = fs::read(&base).ok() != fs::read(&other).ok();
    let r = bf_report(&base, &other);
    let v = json(&r);
    let achieved: Option<Rat> = v["r"].as_str().and_then(|t| t.parse().ok());
    let baseline = q(BF_BASELINE.0, BF_BASELINE.1);
    let coherence = Rat::int(4) * (q(1, 4) + q(1, 8));
    let pass = r.code == 0
        && differ
        && v["bijective_on_prefix"] == true
        && achieved.is_some_and(|x| x <= Rat::ONE && x <= baseline);
    Outcome::new(
        pass,
        format!(
            "seeds 0 and 7 ({}), r = {} (tolerance 1, baseline {}, cross-seed bound {}), r-bijective on first 4: {}",
            if differ { "different builds" } else { "identical builds" },
            v["r"].as_str().unwrap_or("?"),
            baseline,
            coherence,
            v["bijective_on_prefix"]
        ),
    )
}

// ------------------------------------------------------------------ Banach

fn norm(space: &PolytopalNormSpace, x: &[Rat]) -> Rat {
    space
        .functionals()
        .iter()
        .map(|f| f.iter().zip(x).fold(Rat::ZERO, |acc, (&a, &b)| acc + a * b))
        .max()
        .unwrap_or(Rat::ZERO)
}

fn combo(t: &VectorTuple, s: &[Rat]) -> Vec<Rat> {
    let dim = t.space().dim();
    (0..dim)
        .map(|k| {
            t.vectors()
                .iter()
                .zip(s)
                .fold(Rat::ZERO, |acc, (v, &c)| acc + v[k] * c)
        })
        .collect()
}

fn gap(a: &VectorTuple, b: &VectorTuple, s: &[Rat]) -> Rat {
    (norm(a.space(), &combo(a, s)) - norm(b.space(), &combo(b, s))).abs()
}

/// Points of the ℓ¹ unit sphere of `R^n`, `n ≤ 2`: vertices, plus edge
/// points at parameters `t` in `ts`.
fn sphere_points(n: usize, ts: &[Rat]) -> Vec<Vec<Rat>> {
    let mut out = Vec::new();
    if n == 1 {
        return vec![vec![Rat::ONE], vec![-Rat::ONE]];
    }
    for s1 in [Rat::ONE, -Rat::ONE] {
        for s2 in [Rat::ONE, -Rat::ONE] {
            for &t in ts {
                out.push(vec![s1 * t, s2 * (Rat::ONE - t)]);
            }
        }
    }
    out
}

/// Direct sup for dim-1 tuples: `|‖Σ s_i a_i‖ − ‖Σ s_i b_i‖|` is linear
/// between the zeros of `Σ s_i a_i` and `Σ s_i b_i` on each edge, so the
/// sup is attained at a vertex or one of those zeros.
fn dim1_direct(a: &VectorTuple, b: &VectorTuple) -> Rat {
    let n = a.len();
    let mut ts = vec![Rat::ZERO, Rat::ONE];
    if n == 2 {
        for t in [a, b] {
            let (u, v) = (t.vectors()[0][0], t.vectors()[1][0]);
            for (s1, s2) in [(Rat::ONE, Rat::ONE), (Rat::ONE, -Rat::ONE)] {
                // s1·t·u + s2·(1 − t)·v = 0
                let den = s1 * u - s2 * v;
                if !den.is_zero() {
                    let z = -(s2 * v) / den;
                    if z >= Rat::ZERO && z <= Rat::ONE {
                        ts.push(z);
                    }
                }
            }
        }
    }
    sphere_points(n, &ts)
        .iter()
        .map(|s| gap(a, b, s))
        .max()
        .unwrap()
}

fn henson() -> Outcome {
    let coords: Vec<Rat> = [-2, -1, 0, 1, 2].iter().map(|&c| q(c, 2)).collect();
    let mut direct = (0usize, 0usize);
    for ca in 1..=3 {
        for cb in 1..=3 {
            let ea = PolytopalNormSpace::line(Rat::int(ca)).unwrap();
            let eb = PolytopalNormSpace::line(Rat::int(cb)).unwrap();
            for n in 1..=2u32 {
                let count = coords.len().pow(n);
                for ia in 0..count {
                    for ib in 0..count {
                        let vecs = |mut i: usize| {
                            (0..n)
                                .map(|_| {
                                    let v = vec![coords[i % coords.len()]];
                                    i /= coords.len();
                                    v
                                })
                                .collect::<Vec<_>>()
                        };
                        let a = VectorTuple::new(ea.clone(), vecs(ia)).unwrap();
                        let b = VectorTuple::new(eb.clone(), vecs(ib)).unwrap();
                        direct.0 += 1;
                        if dk_banach(&a, &b).unwrap() != dim1_direct(&a, &b) {
                            direct.1 += 1;
                        }
                    }
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = q(1, 16);
    let ts: Vec<Rat> = (0..=16).map(|k| q(k, 16)).collect();
    let (mut random, mut below, mut above, mut amalgam_bad, mut samples) =
        (0usize, 0usize, 0usize, 0usize, 0usize);
    let mut worst_slack_use = Rat::ZERO;
    for _ in 0..200 {
        let n = rng.gen_range(1..=2);
        let (da, db) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
        let pa = rng.gen_range(da..=4);
        let pb = rng.gen_range(db..=4);
        let ea = random_polytopal(&mut rng, da, pa, 2);
        let eb = random_polytopal(&mut rng, db, pb, 2);
        let a = random_vector_tuple(&mut rng, &ea, n, 2);
        let b = random_vector_tuple(&mut rng, &eb, n, 2);
        let dk = dk_banach(&a, &b).unwrap();
        let lower = sphere_points(n, &ts)
            .iter()
            .map(|s| gap(&a, &b, s))
            .max()
            .unwrap();
        let lipschitz = a
            .vectors()
            .iter()
            .zip(b.vectors())
            .map(|(u, v)| norm(&ea, u) + norm(&eb, v))
            .max()
            .unwrap();
        random += 1;
        if dk < lower {
            below += 1;
        }
        if dk > lower + lipschitz * h {
            above += 1;
        }
        if lipschitz.is_positive() {
            worst_slack_use = worst_slack_use.max((dk - lower) / (lipschitz * h));
        }

        let am = banach_amalgamate(&a, &b, dk).unwrap();
        let mut ok = a.vectors().iter().zip(b.vectors()).all(|(u, v)| {
            let d: Vec<Rat> = am
                .left
                .apply(u)
                .iter()
                .zip(am.right.apply(v))
                .map(|(&p, q)| p - q)
                .collect();
            norm(&am.space, &d) <= dk
        });
        for (space, map) in [(&ea, &am.left), (&eb, &am.right)] {
            for x in grid_vectors(space.dim(), &coords) {
                samples += 1;
                ok &= norm(&am.space, &map.apply(&x)) == norm(space, &x);
            }
        }
        if !ok {
            amalgam_bad += 1;
        }
    }
    let pass = direct.1 == 0 && below == 0 && above == 0 && amalgam_bad == 0;
    Outcome::new(
        pass,
        format!(
            "dim-1: {} cases, {} differ from direct evaluation; random: {} tuples, {} below the grid bound, {} above grid + slack \
             (largest slack fraction used {}); amalgams at d^K: {} failing, {} norm samples",
            direct.0, direct.1, random, below, above, worst_slack_use, amalgam_bad, samples
        ),
    )
}

fn grid_vectors(dim: usize, coords: &[Rat]) -> Vec<Vec<Rat>> {
    (0..coords.len().pow(dim as u32))
        .map(|mut i| {
            (0..dim)
                .map(|_| {
                    let c = coords[i % coords.len()];
                    i /= coords.len();
                    c
                })
                .collect()
        })
        .collect()
}

const GURARIJ_FIXTURE: &str = r#"{"e":{"dim":1,"functionals":[["1"],["-1"]]},
"f":{"dim":2,"functionals":[["1","0"],["-1","0"],["0","1"],["0","-1"]]},
"iota":[["1","0"]],"psi":[{"dense":0}]}"#;

fn gurarij_report(b: &Builds, build: &Path) -> metfraisse::Run {
    let fx = b.dir.join("fixture.json");
    fs::write(&fx, GURARIJ_FIXTURE).expect("writable");
    mf(&[
        "check",
        "gurarij",
        s(build),
        "--fixture",
        s(&fx),
        "--eps",
        "1/4",
    ])
}

fn gurarij(b: &Builds) -> Outcome {
    let path = match b.gurarij("a") {
        Ok(p) => p,
        Err(e) => return Outcome::new(false, e),
    };
    let r = gurarij_report(b, &path);
    let v = json(&r);
    if r.code != 0 {
        return Outcome::new(
            false,
            format!("check exited {}: {}{}", r.code, r.stdout, r.stderr),
        );
    }
    // Independent check of the returned map against the loaded stage.
    let Ok(Loaded::Gurarij(_, g)) = artifact::load(&fs::read_to_string(&path).unwrap()) else {
        return Outcome::new(false, "build does not load");
    };
    let images: Vec<Vec<Rat>> = v["images"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            c.as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_str().unwrap().parse().unwrap())
                .collect()
        })
        .collect();
    let eps = q(1, 4);
    let f = PolytopalNormSpace::sup_norm(2);
    let coords: Vec<Rat> = [-2, -1, 0, 1, 2].iter().map(|&c| q(c, 2)).collect();
    let mut worst = Rat::ZERO;
    let mut ok = true;
    for x in grid_vectors(2, &coords) {
        let y: Vec<Rat> = (0..g.space.dim())
            .map(|k| images[0][k] * x[0] + images[1][k] * x[1])
            .collect();
        let (nx, ny) = (norm(&f, &x), g.space.norm(&y));
        ok &= (Rat::ONE - eps) * nx <= ny && ny <= (Rat::ONE + eps) * nx;
        if nx.is_positive() {
            worst = worst.max((ny / nx - Rat::ONE).abs());
        }
    }
    let err = g.space.distance(&images[0], &g.dense[0]);
    ok &= err <= eps;
    Outcome::new(
        ok,
        format!(
            "{} dense vectors, stage dim {}; extension distortion {} on 25 samples, ‖φι(e) − ψ(e)‖ = {}, copy {}",
            g.dense.len(),
            g.space.dim(),
            worst,
            err,
            v["copy"]
        ),
    )
}

// ------------------------------------------------------------- determinism

fn determinism(b: &Builds) -> Outcome {
    let mut diffs = Vec::new();
    let same =
        |x: &Path, y: &Path| fs::read(x).ok().is_some() && fs::read(x).ok() == fs::read(y).ok();
    for seed in ["0", "7"] {
        match b.sphere(seed, "b") {
            Ok(p) if same(&p, &b.dir.join(format!("sphere-{}-a.json", seed))) => {}
            Ok(_) => diffs.push(format!("sphere build seed {}", seed)),
            Err(e) => diffs.push(e),
        }
    }
    match b.gurarij("b") {
        Ok(p) if same(&p, &b.dir.join("gurarij-a.json")) => {}
        Ok(_) => diffs.push("gurarij build".into()),
        Err(e) => diffs.push(e),
    }
    let (a0, b0) = (b.dir.join("sphere-0-a.json"), b.dir.join("sphere-0-b.json"));
    let (a7, b7) = (b.dir.join("sphere-7-a.json"), b.dir.join("sphere-7-b.json"));
    if extension_report(&a0) != extension_report(&b0) {
        diffs.push("extension report".into());
    }
    if bf_report(&a0, &a7) != bf_report(&b0, &b7) {
        diffs.push("back-and-forth report".into());
    }
    let (ga, gb) = (b.dir.join("gurarij-a.json"), b.dir.join("gurarij-b.json"));
    if gurarij_report(b, &ga) != gurarij_report(b, &gb) {
        diffs.push("gurarij report".into());
    }
    match (homogeneity_results(&a0), homogeneity_results(&b0)) {
        (Ok(x), Ok(y)) if x == y => {}
        _ => diffs.push("homogeneity results".into()),
    }
    let hom = |p: &Path| mf(&["check", "homogeneity", s(p), "--map", "0:1,1:0"]);
    if hom(&a0) != hom(&b0) {
        diffs.push("homogeneity report".into());
    }
    Outcome::new(
        diffs.is_empty(),
        format!("3 builds and 5 reports rerun, differing: {:?}", diffs),
    )
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let builds = Builds {
        dir: dir.path().to_path_buf(),
    };
    type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;
    let criteria: Vec<(u32, &str, Option<u64>, Check)> = vec![
        (
            1,
            "approximate isometry calculus laws",
            Some(60),
            Box::new(calculus_laws),
        ),
        (
            2,
            "amalgams are metric spaces",
            Some(60),
            Box::new(amalgam_validity),
        ),
        (
            3,
            "d^K equals the exhaustive grid oracle",
            Some(300),
            Box::new(dk_oracle),
        ),
        (
            4,
            "sphere build has the one-point extension property",
            Some(600),
            Box::new(|| limit_criterion(&builds)),
        ),
        (
            5,
            "approximate ultra-homogeneity",
            Some(600),
            Box::new(|| homogeneity(&builds)),
        ),
        (
            6,
            "back-and-forth between two seeds",
            Some(600),
            Box::new(|| back_and_forth(&builds)),
        ),
        (
            7,
            "Banach intrinsic distance and amalgam",
            Some(300),
            Box::new(henson),
        ),
        (
            8,
            "Gurarij extension of the line into the sup-norm plane",
            Some(600),
            Box::new(|| gurarij(&builds)),
        ),
        (
            9,
            "reruns are byte-identical",
            None,
            Box::new(|| determinism(&builds)),
        ),
    ];
    let mut failed = 0;
    for (n, name, budget, check) in criteria {
        let start = Instant::now();
        let out = check();
        let took = start.elapsed();
        let pass = out.pass && budget.is_none_or(|b| took <= Duration::from_secs(b));
        failed += usize::from(!pass);
        println!(
            "criterion {} {}: {} [{:.1}s{}] {}",
            n,
            name,
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.map(|b| format!(" of {}s", b)).unwrap_or_default(),
            out.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{} criteria failed", failed);
        ExitCode::FAILURE
    }
}
