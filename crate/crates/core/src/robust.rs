//! Outlier-robust embeddings: triangle-filtered SMACOF, Sammon weighting, and
//! the l0-penalized outlier-offset model used as a baseline.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{sammon_weights, DistanceMatrix, Embedding, FilterMask, WeightMatrix, DEFAULT_SAMMON_EPSILON};
use crate::smacof::{initial_configuration, smacof, weight_components, Init, SmacofResult, SolverConfig};
use crate::triangle::{filter_mask, tmds_filter, FilterDiagnostics, FilterMode, FilterOutcome};

/// Plain SMACOF with unit weights.
pub fn smacof_embed(d: &DistanceMatrix, dim: usize, cfg: &SolverConfig) -> Result<SmacofResult> {
    smacof(d, &WeightMatrix::ones(d.n()), dim, cfg)
}

/// SMACOF with weights `1 / max(D_ij, 1e-9)`.
pub fn sammon_embed(d: &DistanceMatrix, dim: usize, cfg: &SolverConfig) -> Result<SmacofResult> {
    smacof(d, &sammon_weights(d, DEFAULT_SAMMON_EPSILON), dim, cfg)
}

#[derive(Debug, Clone)]
pub struct TmdsResult {
    pub solve: SmacofResult,
    pub filter: FilterOutcome,
    /// Mask actually used for the weighted solve.
    pub mask: FilterMask,
    /// Threshold actually applied; above the selected one after a reconnect.
    pub effective_phi: u32,
    pub reconnected: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TmdsDiagnostics {
    pub filter: FilterDiagnostics,
    pub effective_phi: u32,
    pub reconnected: bool,
    pub removed_edges: usize,
    pub iterations: usize,
    pub converged: bool,
    pub final_stress: f64,
    pub stress_trace: Vec<f64>,
}

impl TmdsResult {
    pub fn embedding(&self) -> &Embedding {
        &self.solve.embedding
    }

    pub fn diagnostics(&self) -> TmdsDiagnostics {
        TmdsDiagnostics {
            filter: self.filter.diagnostics(),
            effective_phi: self.effective_phi,
            reconnected: self.reconnected,
            removed_edges: self.mask.removed_count(),
            iterations: self.solve.iterations,
            converged: self.solve.converged,
            final_stress: self.solve.final_stress(),
            stress_trace: self.solve.stress_trace.clone(),
        }
    }
}

/// Filters edges in many broken triangles, then runs SMACOF with 0/1
/// weights on the survivors.
///
/// If the kept edges no longer connect all elements, the threshold is raised
/// to the smallest observed count that reconnects them.
pub fn tmds_embed(
    d: &DistanceMatrix,
    dim: usize,
    mode: FilterMode,
    rel_tol: f64,
    cfg: &SolverConfig,
) -> Result<TmdsResult> {
    tmds_solve(d, dim, tmds_filter(d, mode, rel_tol)?, cfg)
}

/// The solve half of [`tmds_embed`], for a filter outcome computed on `d`.
pub fn tmds_solve(d: &DistanceMatrix, dim: usize, filter: FilterOutcome, cfg: &SolverConfig) -> Result<TmdsResult> {
    if filter.counts.n() != d.n() {
        return Err(Error::DimensionMismatch(format!(
            "filter covers {} elements, distances {}",
            filter.counts.n(),
            d.n()
        )));
    }
    let mut phi = filter.threshold.phi;
    let mut mask = filter.mask.clone();
    let mut reconnected = false;
    if weight_components(&mask.to_weights()) > 1 {
        let mut candidates: Vec<u32> = filter.counts.edges().map(|e| e.2).filter(|&c| c > phi).collect();
        candidates.sort_unstable();
        candidates.dedup();
        for c in candidates {
            let m = filter_mask(&filter.counts, c);
            if weight_components(&m.to_weights()) == 1 {
                phi = c;
                mask = m;
                reconnected = true;
                break;
            }
        }
    }
    let solve = smacof(d, &mask.to_weights(), dim, cfg)?;
    Ok(TmdsResult { solve, filter, mask, effective_phi: phi, reconnected })
}

#[derive(Debug, Clone, Serialize)]
pub struct Fg12Result {
    #[serde(skip)]
    pub embedding: Embedding,
    /// Symmetric outlier offsets `O`, zero on the diagonal.
    #[serde(skip)]
    pub outlier_offsets: DMatrix<f64>,
    pub nonzero_count: usize,
    /// Combined objective after each outer iteration.
    pub objective_trace: Vec<f64>,
    pub outer_iterations: usize,
    pub lambda: f64,
}

impl Fg12Result {
    pub fn outlier_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.outlier_offsets.nrows();
        crate::metric::pairs(n).filter(|&(i, j)| self.outlier_offsets[(i, j)] != 0.0).collect()
    }
}

/// `sum_{i<j} (D_ij - |x_i - x_j| - O_ij)^2 + lambda * #{i<j : O_ij != 0}`.
pub fn fg12_objective(d: &DistanceMatrix, x: &Embedding, offsets: &DMatrix<f64>, lambda: f64) -> f64 {
    let mut total = 0.0;
    for (i, j) in d.pairs() {
        let o = offsets[(i, j)];
        let r = d.get(i, j) - x.distance(i, j) - o;
        total += r * r;
        if o != 0.0 {
            total += lambda;
        }
    }
    total
}

/// Exact minimizer of the separable l0 subproblem for fixed `x`: keep the
/// residual as an offset exactly when its square exceeds `lambda`.
fn offset_step(d: &DistanceMatrix, x: &Embedding, lambda: f64) -> DMatrix<f64> {
    let n = d.n();
    let mut o = DMatrix::zeros(n, n);
    for (i, j) in d.pairs() {
        let r = d.get(i, j) - x.distance(i, j);
        if r * r > lambda {
            o[(i, j)] = r;
            o[(j, i)] = r;
        }
    }
    o
}

/// Alternating minimization of the l0-penalized stress.
///
/// Starting from the configured embedding, each outer iteration first resets
/// `O` by hard thresholding the current residuals, then runs SMACOF on
/// `D - O` from the current configuration. Stops when `O` repeats, when the
/// objective's relative decrease drops below `rel_stress_tol`, or after
/// `max_iters` outer iterations.
pub fn fg12_embed(d: &DistanceMatrix, dim: usize, lambda: f64, cfg: &SolverConfig) -> Result<Fg12Result> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    cfg.validate()?;
    let ones = WeightMatrix::ones(d.n());
    let mut x = initial_configuration(d, dim, cfg)?;
    let mut offsets = offset_step(d, &x, lambda);
    let mut trace: Vec<f64> = Vec::new();
    let mut outer = 0;
    while outer < cfg.max_iters {
        outer += 1;
        let target = if offsets.iter().all(|&v| v == 0.0) {
            d.clone()
        } else {
            // D - O is the fitted distance on offset pairs, nonnegative up to rounding
            let mut t = d.as_matrix() - &offsets;
            t.apply(|v| *v = v.max(0.0));
            DistanceMatrix::new(t)?
        };
        let inner = SolverConfig { init: Init::Given(x), ..cfg.clone() };
        x = smacof(&target, &ones, dim, &inner)?.embedding;
        let next = offset_step(d, &x, lambda);
        let objective = fg12_objective(d, &x, &next, lambda);
        let repeated = next == offsets;
        offsets = next;
        let stalled = trace
            .last()
            .is_some_and(|&prev| prev == 0.0 || (prev - objective) / prev < cfg.rel_stress_tol);
        trace.push(objective);
        if repeated || stalled {
            break;
        }
    }
    let nonzero_count = d.pairs().filter(|&(i, j)| offsets[(i, j)] != 0.0).count();
    Ok(Fg12Result { embedding: x, outlier_offsets: offsets, nonzero_count, objective_trace: trace, outer_iterations: outer, lambda })
}
