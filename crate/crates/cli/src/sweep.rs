//! Parameter sweeps. Instances run in parallel; rows are collected in grid
//! and repeat order, so the CSVs do not depend on scheduling. Repeat `r` at
//! every grid point uses seed `derive_seed(seed, kind, r)`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context as _, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use trimds::evaluation::{detection_report, embedding_score};
use trimds::seed::{derive_seed, rng};
use trimds::synthetic::{deform_edge, sample_hypercube, GroundTruthScenario, ScenarioSpec};
use trimds::theory::{break_probability_mc, break_probability_theory};
use trimds::triangle::{default_triangles_per_edge, tmds_filter, FilterMode, DEFAULT_REL_TOL};
use trimds::{pairwise_distances, smacof, smacof_embed, Distortion};

use crate::args::{CenteringArg, InitArg, Method, ModeArg, SweepArgs, SweepKind};
use crate::commands::{centering, filter_mode, run_method, solver_config, Context, MethodSettings};
use crate::config::write_run_config;
use crate::output::{ensure_dir, write_table, Timer};

#[derive(Serialize)]
struct SweepResolved {
    kind: SweepKind,
    grid: Vec<f64>,
    repeats: usize,
    n: usize,
    dim: usize,
    methods: Vec<Method>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    mode: ModeArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_edge: Option<usize>,
    tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    centering: CenteringArg,
    init: InitArg,
    seed: u64,
    out: PathBuf,
}

fn default_grid(kind: SweepKind) -> Vec<f64> {
    match kind {
        SweepKind::Rate => vec![0.02, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35],
        SweepKind::Deform => vec![-3.0, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0],
        SweepKind::Sigma => vec![0.3, 0.6, 1.0],
        SweepKind::Theory => vec![2.0, 3.0, 4.0, 6.0, 8.0, 10.0, 15.0, 20.0, 30.0],
        SweepKind::Timing => vec![150.0, 300.0, 600.0],
    }
}

fn kind_name(kind: SweepKind) -> &'static str {
    match kind {
        SweepKind::Rate => "rate",
        SweepKind::Deform => "deform",
        SweepKind::Sigma => "sigma",
        SweepKind::Theory => "theory",
        SweepKind::Timing => "timing",
    }
}

fn check_grid(kind: SweepKind, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        bail!("the grid is empty");
    }
    for &v in grid {
        let ok = v.is_finite()
            && match kind {
                SweepKind::Rate => (0.0..=1.0).contains(&v),
                SweepKind::Deform => true,
                SweepKind::Sigma => v >= 0.0,
                SweepKind::Theory => v >= 1.0 && v.fract() == 0.0,
                SweepKind::Timing => v >= 4.0 && v.fract() == 0.0,
            };
        if !ok {
            bail!("invalid {} grid value {v}", kind_name(kind));
        }
    }
    Ok(())
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = v.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    s / c as f64
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sweep(ctx: &Context, a: SweepArgs) -> Result<()> {
    let kind = a.kind.unwrap_or(SweepKind::Rate);
    let name = kind_name(kind);
    let grid = a.grid.clone().unwrap_or_else(|| default_grid(kind));
    check_grid(kind, &grid)?;
    let repeats = a.repeats.unwrap_or(match kind {
        SweepKind::Deform => 50,
        SweepKind::Timing | SweepKind::Theory => 1,
        _ => 10,
    });
    if repeats == 0 {
        bail!("--repeats must be at least 1");
    }
    let methods = a.methods.clone().unwrap_or_else(|| vec![Method::Tmds, Method::Smacof]);
    if methods.contains(&Method::Fg12) && a.lambda.is_none() {
        bail!("fg12 needs --lambda");
    }
    let seed = ctx.seed(a.seed, "sweep");
    let out = ctx.out(a.out.clone(), "sweep");
    let n = a.n.unwrap_or(100);
    let dim = a.dim.unwrap_or(2);
    let trials = a.trials.unwrap_or(1_000_000);
    let tol = a.tol.unwrap_or(DEFAULT_REL_TOL);
    ensure_dir(&out)?;
    let mut timer = Timer::default();
    let job = Job { a: &a, n, dim, tol, seed, repeats, methods: &methods, grid: &grid, out: &out };
    timer.time(name, || match kind {
        SweepKind::Rate | SweepKind::Sigma => job.scores(kind),
        SweepKind::Deform => job.deform(),
        SweepKind::Theory => job.theory(trials),
        SweepKind::Timing => job.timing(),
    })?;
    let resolved = SweepResolved {
        kind,
        grid: grid.clone(),
        repeats,
        n,
        dim,
        methods: methods.clone(),
        trials: (kind == SweepKind::Theory).then_some(trials),
        mode: a.mode.unwrap_or(ModeArg::Exact),
        per_edge: a.per_edge,
        tol,
        lambda: a.lambda,
        centering: a.centering.unwrap_or(CenteringArg::Mean),
        init: a.init.unwrap_or(InitArg::Classical),
        seed,
        out: out.clone(),
    };
    write_run_config(&out, ctx.global_seed, "sweep", &resolved)?;
    timer.save(&out)?;
    println!("{}", out.display());
    Ok(())
}

struct Job<'a> {
    a: &'a SweepArgs,
    n: usize,
    dim: usize,
    tol: f64,
    seed: u64,
    repeats: usize,
    methods: &'a [Method],
    grid: &'a [f64],
    out: &'a Path,
}

struct ScoreCell {
    score: f64,
    precision: Option<f64>,
    recall: Option<f64>,
    removed: Option<usize>,
}

impl Job<'_> {
    fn repeat_seed(&self, tag: &str, r: usize) -> u64 {
        derive_seed(self.seed, tag, r as u64)
    }

    fn instances(&self) -> Vec<(usize, usize)> {
        (0..self.grid.len()).flat_map(|g| (0..self.repeats).map(move |r| (g, r))).collect()
    }

    fn scores(&self, kind: SweepKind) -> Result<()> {
        let (tag, column) = if kind == SweepKind::Rate { ("rate", "rate") } else { ("sigma", "sigma") };
        let centering = centering(self.a.centering);
        let cells: Vec<Vec<ScoreCell>> = self
            .instances()
            .into_par_iter()
            .map(|(g, r)| -> Result<Vec<ScoreCell>> {
                let s = self.repeat_seed(tag, r);
                let v = self.grid[g];
                let spec = if kind == SweepKind::Rate {
                    ScenarioSpec::hypercube_with_rate(self.n, self.dim, v, s)
                } else {
                    ScenarioSpec::hypercube(self.n, self.dim, Distortion::LogNormal { sigma: v, centering }, s)
                };
                let scenario = GroundTruthScenario::generate(spec)?;
                let settings = MethodSettings {
                    dim: self.dim,
                    lambda: self.a.lambda,
                    solver: solver_config(self.a.init, None, None, s),
                    mode: filter_mode(self.a.mode, self.a.per_edge, s, self.n)?,
                    tol: self.tol,
                };
                self.methods
                    .iter()
                    .map(|&m| {
                        let run = run_method(m, &scenario.observed_d, &settings, &mut Timer::quiet())?;
                        let score = embedding_score(&scenario.true_d, &run.embedding)?.score;
                        let (precision, recall, removed) = match (&run.mask, kind) {
                            (Some(mask), SweepKind::Rate) => {
                                let rep = detection_report(mask, &scenario.outliers)?;
                                (Some(rep.precision), Some(rep.recall), Some(mask.removed_count()))
                            }
                            (Some(mask), _) => (None, None, Some(mask.removed_count())),
                            (None, _) => (None, None, None),
                        };
                        Ok(ScoreCell { score, precision, recall, removed })
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;

        let mut rows = Vec::new();
        for (&(g, r), cell) in self.instances().iter().zip(&cells) {
            for (m, c) in self.methods.iter().zip(cell) {
                rows.push(vec![
                    self.grid[g].to_string(),
                    r.to_string(),
                    self.repeat_seed(tag, r).to_string(),
                    m.name().to_string(),
                    c.score.to_string(),
                    opt(c.precision),
                    opt(c.recall),
                    c.removed.map(|v| v.to_string()).unwrap_or_default(),
                ]);
            }
        }
        write_table(
            &self.out.join(format!("{tag}_sweep.csv")),
            &[column, "repeat", "seed", "method", "score", "precision", "recall", "removed"],
            &rows,
        )?;

        let mut summary = Vec::new();
        for (g, &v) in self.grid.iter().enumerate() {
            let here: Vec<&Vec<ScoreCell>> = self.instances().iter().zip(&cells).filter(|((gg, _), _)| *gg == g).map(|(_, c)| c).collect();
            for (k, m) in self.methods.iter().enumerate() {
                let col = |f: &dyn Fn(&ScoreCell) -> Option<f64>| -> Option<f64> {
                    let vals: Vec<f64> = here.iter().filter_map(|c| f(&c[k])).collect();
                    (!vals.is_empty()).then(|| mean(vals.into_iter()))
                };
                summary.push(vec![
                    v.to_string(),
                    m.name().to_string(),
                    self.repeats.to_string(),
                    opt(col(&|c| Some(c.score))),
                    opt(col(&|c| c.precision)),
                    opt(col(&|c| c.recall)),
                ]);
            }
        }
        write_table(
            &self.out.join(format!("{tag}_summary.csv")),
            &[column, "method", "repeats", "mean_score", "mean_precision", "mean_recall"],
            &summary,
        )
    }

    fn deform(&self) -> Result<()> {
        if self.n < 3 {
            bail!("deformation sweep needs n >= 3");
        }
        let cells: Vec<(usize, usize, u32, u32, bool)> = self
            .instances()
            .into_par_iter()
            .map(|(g, r)| -> Result<_> {
                let s = self.repeat_seed("deform", r);
                let d = pairwise_distances(&sample_hypercube(self.n, self.dim, derive_seed(s, "points", 0)), 2.0)?;
                let mut pick = rng(derive_seed(s, "edge", 0));
                let i = pick.random_range(0..self.n);
                let j = (i + pick.random_range(1..self.n)) % self.n;
                let deformed = deform_edge(&d, i, j, self.grid[g])?;
                let f = tmds_filter(&deformed, filter_mode(self.a.mode, self.a.per_edge, s, self.n)?, self.tol)?;
                Ok((i.min(j), i.max(j), f.counts.count(i, j), f.threshold.phi, !f.mask.keep(i, j)))
            })
            .collect::<Result<_>>()?;
        let mut rows = Vec::new();
        for (&(g, r), &(i, j, count, phi, hit)) in self.instances().iter().zip(&cells) {
            rows.push(vec![
                self.grid[g].to_string(),
                r.to_string(),
                self.repeat_seed("deform", r).to_string(),
                i.to_string(),
                j.to_string(),
                count.to_string(),
                phi.to_string(),
                (hit as u8).to_string(),
            ]);
        }
        write_table(
            &self.out.join("deform_sweep.csv"),
            &["log2_factor", "repeat", "seed", "i", "j", "count", "phi", "detected"],
            &rows,
        )?;
        let summary: Vec<Vec<String>> = self
            .grid
            .iter()
            .enumerate()
            .map(|(g, &v)| {
                let hits = self.instances().iter().zip(&cells).filter(|((gg, _), c)| *gg == g && c.4).count();
                vec![v.to_string(), self.repeats.to_string(), hits.to_string(), (hits as f64 / self.repeats as f64).to_string()]
            })
            .collect();
        write_table(&self.out.join("deform_summary.csv"), &["log2_factor", "repeats", "detected", "probability"], &summary)
    }

    fn theory(&self, trials: usize) -> Result<()> {
        if trials == 0 {
            bail!("--trials must be at least 1");
        }
        let rows: Vec<Vec<String>> = self
            .grid
            .iter()
            .map(|&v| {
                let dim = v as usize;
                let th = break_probability_theory(dim);
                let mc = break_probability_mc(dim, trials, derive_seed(self.seed, "theory", dim as u64));
                vec![
                    dim.to_string(),
                    th.to_string(),
                    mc.estimate.to_string(),
                    mc.halfwidth.to_string(),
                    (mc.estimate - th).abs().to_string(),
                    trials.to_string(),
                ]
            })
            .collect();
        write_table(&self.out.join("theory.csv"), &["dim", "theory", "mc", "halfwidth", "abs_gap", "trials"], &rows)
    }

    /// Wall-clock seconds; hardware-dependent, run sequentially.
    fn timing(&self) -> Result<()> {
        let mut rows = Vec::new();
        for &v in self.grid {
            let n = v as usize;
            for r in 0..self.repeats {
                let s = self.repeat_seed("timing", r);
                let scenario = GroundTruthScenario::generate(ScenarioSpec::hypercube_with_rate(n, self.dim, 0.10, s))?;
                let d = &scenario.observed_d;
                let per_edge = self.a.per_edge.unwrap_or_else(|| default_triangles_per_edge(n, scenario.outliers.len()));
                let t = Instant::now();
                let f = tmds_filter(d, FilterMode::Exact, self.tol)?;
                let exact = t.elapsed().as_secs_f64();
                let t = Instant::now();
                tmds_filter(d, FilterMode::Sampled { per_edge, seed: s }, self.tol)?;
                let sampled = t.elapsed().as_secs_f64();
                let cfg = solver_config(self.a.init, None, None, s);
                let t = Instant::now();
                smacof_embed(d, self.dim, &cfg)?;
                let plain = t.elapsed().as_secs_f64();
                let t = Instant::now();
                smacof(d, &f.mask.to_weights(), self.dim, &cfg).context("weighted solve after filtering")?;
                let weighted = t.elapsed().as_secs_f64();
                rows.push(vec![
                    n.to_string(),
                    r.to_string(),
                    exact.to_string(),
                    sampled.to_string(),
                    per_edge.to_string(),
                    plain.to_string(),
                    weighted.to_string(),
                    (exact / plain).to_string(),
                    (sampled / plain).to_string(),
                ]);
            }
        }
        write_table(
            &self.out.join("timing.csv"),
            &[
                "n",
                "repeat",
                "filter_exact_s",
                "filter_sampled_s",
                "per_edge",
                "smacof_s",
                "weighted_smacof_s",
                "exact_ratio",
                "sampled_ratio",
            ],
            &rows,
        )
    }
}
