use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _, Result};
use serde::Serialize;
use serde_json::json;
use trimds::evaluation::{detection_report, embedding_score, shepard_data};
use trimds::io;
use trimds::seed::derive_seed;
use trimds::synthetic::{self, GroundTruthScenario, PointSource, ScenarioSpec};
use trimds::triangle::{default_triangles_per_edge, tmds_filter, FilterMode, DEFAULT_REL_TOL};
use trimds::{
    fg12_embed, sammon_embed, smacof_embed, tmds_solve, Centering, DistanceMatrix, Distortion, Embedding, FilterMask,
    Init, ShapeKind, SolverConfig,
};

use crate::args::{
    CenteringArg, EmbedArgs, EvaluateArgs, FilterArgs, GenerateArgs, InitArg, Method, ModeArg, PointKind, Reference,
};
use crate::config::write_run_config;
use crate::output::{ensure_dir, write_csv, write_json, Timer};

pub struct Context {
    pub global_seed: u64,
    pub out_root: PathBuf,
}

impl Context {
    /// The command's own seed, or one derived from the global seed.
    pub fn seed(&self, given: Option<u64>, command: &str) -> u64 {
        given.unwrap_or_else(|| derive_seed(self.global_seed, command, 0))
    }

    pub fn out(&self, given: Option<PathBuf>, command: &str) -> PathBuf {
        given.unwrap_or_else(|| self.out_root.join(command))
    }
}

pub fn centering(c: Option<CenteringArg>) -> Centering {
    match c {
        Some(CenteringArg::Median) => Centering::Median,
        Some(CenteringArg::Mean) | None => Centering::Mean,
    }
}

fn centering_arg(c: Centering) -> CenteringArg {
    match c {
        Centering::Mean => CenteringArg::Mean,
        Centering::Median => CenteringArg::Median,
    }
}

pub fn filter_mode(mode: Option<ModeArg>, per_edge: Option<usize>, seed: u64, n: usize) -> Result<FilterMode> {
    Ok(match mode.unwrap_or(ModeArg::Exact) {
        ModeArg::Exact => FilterMode::Exact,
        ModeArg::Sampled => {
            let per_edge = per_edge.unwrap_or_else(|| default_triangles_per_edge(n, 0));
            if per_edge == 0 {
                bail!("--per-edge must be at least 1");
            }
            FilterMode::Sampled { per_edge, seed }
        }
    })
}

pub fn solver_config(init: Option<InitArg>, max_iters: Option<usize>, rel_tol: Option<f64>, seed: u64) -> SolverConfig {
    let base = SolverConfig::default();
    SolverConfig {
        max_iters: max_iters.unwrap_or(base.max_iters),
        rel_stress_tol: rel_tol.unwrap_or(base.rel_stress_tol),
        init: match init.unwrap_or(InitArg::Classical) {
            InitArg::Classical => Init::Classical,
            InitArg::Random => Init::Random,
        },
        seed,
    }
}

fn distances_source(input: Option<PathBuf>, bundle: Option<PathBuf>) -> Result<PathBuf> {
    match (input, bundle) {
        (Some(p), None) => Ok(p),
        (None, Some(b)) => Ok(b.join(synthetic::OBSERVED_D_FILE)),
        (Some(_), Some(_)) => bail!("give either --input or --bundle, not both"),
        (None, None) => bail!("no distances given; pass --input or --bundle"),
    }
}

fn load_distances(path: &Path) -> Result<DistanceMatrix> {
    let d = io::load_distance_matrix(path).with_context(|| format!("loading distances {}", path.display()))?;
    if d.n() < 3 {
        bail!("{} has {} elements; at least 3 are needed", path.display(), d.n());
    }
    Ok(d)
}

#[derive(Serialize)]
struct GenerateResolved {
    kind: PointKind,
    n: usize,
    dim: usize,
    jitter: f64,
    scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    outlier_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    centering: CenteringArg,
    seed: u64,
    out: PathBuf,
}

pub fn generate(ctx: &Context, a: GenerateArgs) -> Result<()> {
    let kind = a.kind.unwrap_or(PointKind::Hypercube);
    let n = a.n.unwrap_or(70);
    let dim = a.dim.unwrap_or(2);
    let seed = ctx.seed(a.seed, "generate");
    let out = ctx.out(a.out, "generate");
    let points = match kind {
        PointKind::Hypercube => PointSource::Hypercube { n, dim },
        PointKind::Plus | PointKind::Spiral => {
            if dim != 2 {
                bail!("shape scenarios are two-dimensional; got --dim {dim}");
            }
            let shape = if kind == PointKind::Plus { ShapeKind::Plus } else { ShapeKind::Spiral };
            PointSource::Shape { shape, n, jitter: a.jitter.unwrap_or(0.0) }
        }
    };
    let count = match (a.outliers, a.outlier_count) {
        (Some(_), Some(_)) => bail!("set either outliers (a rate) or outlier_count, not both"),
        (Some(rate), None) => {
            if !(0.0..=1.0).contains(&rate) {
                bail!("outlier rate must lie in [0, 1], got {rate}");
            }
            Some(synthetic::outlier_count(n, rate))
        }
        (None, c) => c,
    };
    let centering = centering(a.centering);
    let distortion = match (a.sigma, count) {
        (Some(_), Some(_)) => bail!("log-normal sigma and outlier injection are exclusive"),
        (Some(sigma), None) => Distortion::LogNormal { sigma, centering },
        (None, Some(count)) => Distortion::Outliers { count },
        (None, None) => Distortion::None,
    };
    let spec = ScenarioSpec { points, scale: a.scale.unwrap_or(1.0), distortion, seed };
    let mut timer = Timer::default();
    let scenario = timer.time("generate", || GroundTruthScenario::generate(spec))?;
    timer.time("write", || scenario.write_bundle(&out)).with_context(|| format!("writing bundle {}", out.display()))?;
    let resolved = GenerateResolved {
        kind,
        n,
        dim,
        jitter: a.jitter.unwrap_or(0.0),
        scale: spec.scale,
        outlier_count: count,
        sigma: a.sigma,
        centering: centering_arg(centering),
        seed,
        out: out.clone(),
    };
    write_run_config(&out, ctx.global_seed, "generate", &resolved)?;
    println!("{}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct FilterResolved {
    input: PathBuf,
    mode: ModeArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_edge: Option<usize>,
    seed: u64,
    tol: f64,
    out: PathBuf,
}

#[derive(Serialize)]
struct CountRow {
    i: usize,
    j: usize,
    count: u32,
    tested: u32,
    flagged: bool,
}

pub fn filter(ctx: &Context, a: FilterArgs) -> Result<()> {
    let input = distances_source(a.input, a.bundle)?;
    let seed = ctx.seed(a.seed, "filter");
    let tol = a.tol.unwrap_or(DEFAULT_REL_TOL);
    let out = ctx.out(a.out, "filter");
    let mut timer = Timer::default();
    let d = timer.time("load", || load_distances(&input))?;
    let mode = filter_mode(a.mode, a.per_edge, seed, d.n())?;
    let outcome = timer.time("filter", || tmds_filter(&d, mode, tol))?;
    ensure_dir(&out)?;
    io::save_mask(out.join("mask.csv"), &outcome.mask)?;
    let diag = outcome.diagnostics();
    write_json(&out.join("filter.json"), &json!({ "n": d.n(), "input": input, "diagnostics": diag }))?;
    let rows: Vec<CountRow> = outcome
        .counts
        .edges()
        .map(|(i, j, count)| CountRow { i, j, count, tested: outcome.counts.tested(i, j), flagged: !outcome.mask.keep(i, j) })
        .collect();
    write_csv(&out.join("counts.csv"), &rows)?;
    let per_edge = match mode {
        FilterMode::Sampled { per_edge, .. } => Some(per_edge),
        FilterMode::Exact => None,
    };
    let resolved = FilterResolved { input, mode: a.mode.unwrap_or(ModeArg::Exact), per_edge, seed, tol, out: out.clone() };
    write_run_config(&out, ctx.global_seed, "filter", &resolved)?;
    timer.save(&out)?;
    eprintln!(
        "phi {}{}, {} of {} edges flagged",
        diag.phi,
        if diag.fallback { " (fallback)" } else { "" },
        diag.flagged.len(),
        d.edge_count()
    );
    println!("{}", out.display());
    Ok(())
}

pub struct MethodRun {
    pub embedding: Embedding,
    /// Pairs the method treated as outliers, when it has that notion.
    pub mask: Option<FilterMask>,
    pub diagnostics: serde_json::Value,
}

pub struct MethodSettings {
    pub dim: usize,
    pub lambda: Option<f64>,
    pub solver: SolverConfig,
    pub mode: FilterMode,
    pub tol: f64,
}

pub fn run_method(method: Method, d: &DistanceMatrix, s: &MethodSettings, timer: &mut Timer) -> Result<MethodRun> {
    Ok(match method {
        Method::Tmds => {
            let filter = timer.time("filter", || tmds_filter(d, s.mode, s.tol))?;
            let r = timer.time("solve", || tmds_solve(d, s.dim, filter, &s.solver))?;
            if r.reconnected {
                eprintln!(
                    "note: the filtered graph was disconnected; phi raised from {} to {} to reconnect it",
                    r.filter.threshold.phi, r.effective_phi
                );
            }
            let diagnostics = serde_json::to_value(r.diagnostics())?;
            MethodRun { embedding: r.solve.embedding, mask: Some(r.mask), diagnostics }
        }
        Method::Smacof | Method::Sammon => {
            let r = timer.time("solve", || {
                if method == Method::Smacof {
                    smacof_embed(d, s.dim, &s.solver)
                } else {
                    sammon_embed(d, s.dim, &s.solver)
                }
            })?;
            let mut diagnostics = serde_json::to_value(&r)?;
            diagnostics["final_stress"] = json!(r.final_stress());
            MethodRun { embedding: r.embedding, mask: None, diagnostics }
        }
        Method::Fg12 => {
            let lambda = s.lambda.ok_or_else(|| anyhow!("fg12 needs --lambda"))?;
            let r = timer.time("solve", || fg12_embed(d, s.dim, lambda, &s.solver))?;
            let mut mask = FilterMask::all_kept(d.n());
            for (i, j) in r.outlier_pairs() {
                mask.remove(i, j);
            }
            let diagnostics = serde_json::to_value(&r)?;
            MethodRun { embedding: r.embedding, mask: Some(mask), diagnostics }
        }
    })
}

#[derive(Serialize)]
struct EmbedResolved {
    input: PathBuf,
    method: Method,
    dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    init: InitArg,
    max_iters: usize,
    rel_tol: f64,
    mode: ModeArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_edge: Option<usize>,
    tol: f64,
    seed: u64,
    out: PathBuf,
}

pub fn embed(ctx: &Context, a: EmbedArgs) -> Result<()> {
    let input = distances_source(a.input, a.bundle)?;
    let method = a.method.unwrap_or(Method::Tmds);
    let seed = ctx.seed(a.seed, "embed");
    let out = ctx.out(a.out, "embed");
    if method == Method::Fg12 && a.lambda.is_none() {
        bail!("fg12 needs --lambda");
    }
    let mut timer = Timer::default();
    let d = timer.time("load", || load_distances(&input))?;
    let settings = MethodSettings {
        dim: a.dim.unwrap_or(2),
        lambda: a.lambda,
        solver: solver_config(a.init, a.max_iters, a.rel_tol, seed),
        mode: filter_mode(a.mode, a.per_edge, seed, d.n())?,
        tol: a.tol.unwrap_or(DEFAULT_REL_TOL),
    };
    let run = run_method(method, &d, &settings, &mut timer)?;
    ensure_dir(&out)?;
    io::save_embedding(out.join("embedding.csv"), &run.embedding)?;
    if let Some(mask) = &run.mask {
        io::save_mask(out.join("mask.csv"), mask)?;
    }
    write_json(
        &out.join("embed.json"),
        &json!({ "method": method.name(), "n": d.n(), "dim": settings.dim, "input": input, "diagnostics": run.diagnostics }),
    )?;
    let per_edge = match settings.mode {
        FilterMode::Sampled { per_edge, .. } => Some(per_edge),
        FilterMode::Exact => None,
    };
    let resolved = EmbedResolved {
        input,
        method,
        dim: settings.dim,
        lambda: a.lambda,
        init: a.init.unwrap_or(InitArg::Classical),
        max_iters: settings.solver.max_iters,
        rel_tol: settings.solver.rel_stress_tol,
        mode: a.mode.unwrap_or(ModeArg::Exact),
        per_edge,
        tol: settings.tol,
        seed,
        out: out.clone(),
    };
    write_run_config(&out, ctx.global_seed, "embed", &resolved)?;
    timer.save(&out)?;
    println!("{}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct EvaluateResolved {
    #[serde(skip_serializing_if = "Option::is_none")]
    bundle: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distances: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    truth: Option<PathBuf>,
    embedding: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    mask: Option<PathBuf>,
    reference: Reference,
    out: PathBuf,
}

fn load_truth(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let pairs: Vec<[usize; 2]> = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(pairs.into_iter().map(|[i, j]| (i, j)).collect())
}

pub fn evaluate(ctx: &Context, a: EvaluateArgs) -> Result<()> {
    let embedding_path = a.embedding.clone().ok_or_else(|| anyhow!("--embedding is required"))?;
    let out = ctx.out(a.out.clone(), "evaluate");
    let (observed_path, reference, reference_path, truth_path) = match (&a.bundle, &a.distances) {
        (Some(b), None) => {
            let reference = a.reference.unwrap_or(Reference::True);
            let reference_file = match reference {
                Reference::True => synthetic::TRUE_D_FILE,
                Reference::Observed => synthetic::OBSERVED_D_FILE,
            };
            let truth = a.truth.clone().unwrap_or_else(|| b.join(synthetic::OUTLIERS_FILE));
            (b.join(synthetic::OBSERVED_D_FILE), reference, b.join(reference_file), Some(truth))
        }
        (None, Some(d)) => {
            if a.reference == Some(Reference::True) {
                bail!("--reference true needs a bundle with ground-truth distances");
            }
            (d.clone(), Reference::Observed, d.clone(), a.truth.clone())
        }
        (Some(_), Some(_)) => bail!("give either --bundle or --distances, not both"),
        (None, None) => bail!("no distances given; pass --bundle or --distances"),
    };
    let mask_path = a.mask.clone().or_else(|| {
        let sibling = embedding_path.with_file_name("mask.csv");
        sibling.exists().then_some(sibling)
    });

    let mut timer = Timer::default();
    let (observed, reference_d, x, mask, truth) = timer.time("load", || -> Result<_> {
        let observed = load_distances(&observed_path)?;
        let reference_d = if reference_path == observed_path { observed.clone() } else { load_distances(&reference_path)? };
        let x = io::load_embedding(&embedding_path).with_context(|| format!("loading {}", embedding_path.display()))?;
        let mask = mask_path.as_ref().map(|p| io::load_mask(p).with_context(|| format!("loading {}", p.display()))).transpose()?;
        let truth = truth_path.as_ref().map(|p| load_truth(p)).transpose()?;
        Ok((observed, reference_d, x, mask, truth))
    })?;
    if x.n() != observed.n() {
        bail!("embedding has {} rows but the distances have {} elements", x.n(), observed.n());
    }
    if let Some(m) = &mask {
        if m.n() != observed.n() {
            bail!("mask is {}x{0} but the distances have {} elements", m.n(), observed.n());
        }
    }
    let (score, detection, rows) = timer.time("evaluate", || -> Result<_> {
        let score = embedding_score(&reference_d, &x)?;
        let detection = match (&mask, &truth) {
            (Some(m), Some(t)) => Some(detection_report(m, t)?),
            _ => None,
        };
        let shown = mask.clone().unwrap_or_else(|| FilterMask::all_kept(observed.n()));
        Ok((score, detection, shepard_data(&observed, &x, &shown)?))
    })?;
    ensure_dir(&out)?;
    write_json(
        &out.join("report.json"),
        &json!({
            "n": observed.n(),
            "reference": reference,
            "reference_distances": reference_path,
            "embedding_score": score,
            "detection": detection,
        }),
    )?;
    write_csv(&out.join("shepard.csv"), &rows)?;
    let resolved = EvaluateResolved {
        distances: a.bundle.is_none().then(|| observed_path.clone()),
        bundle: a.bundle,
        truth: truth_path,
        embedding: embedding_path,
        mask: mask_path,
        reference,
        out: out.clone(),
    };
    write_run_config(&out, ctx.global_seed, "evaluate", &resolved)?;
    timer.save(&out)?;
    eprintln!("embedding score {:.6} over {} pairs", score.score, score.scored_pairs);
    if let Some(r) = detection {
        eprintln!("precision {:.4}, recall {:.4}", r.precision, r.recall);
    }
    println!("{}", out.display());
    Ok(())
}
