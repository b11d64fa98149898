//! Weighted stress majorization (SMACOF) and its classical-scaling start.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{stress_unchecked, DistanceMatrix, Embedding, WeightMatrix};
use crate::seed::rng;

pub const DEFAULT_MAX_ITERS: usize = 300;
pub const DEFAULT_REL_STRESS_TOL: f64 = 1e-6;

/// Starting configuration for an iterative solver.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    /// Torgerson scaling of the input dissimilarities.
    Classical,
    /// Uniform in `[0, s]^dim`, `s` the mean off-diagonal dissimilarity,
    /// drawn from the config seed.
    Random,
    Given(Embedding),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stop once `(S_prev - S) / S_prev` falls below this.
    pub rel_stress_tol: f64,
    pub init: Init,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: DEFAULT_MAX_ITERS,
            rel_stress_tol: DEFAULT_REL_STRESS_TOL,
            init: Init::Classical,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn random(seed: u64) -> Self {
        Self { init: Init::Random, seed, ..Self::default() }
    }

    pub fn given(x: Embedding) -> Self {
        Self { init: Init::Given(x), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.rel_stress_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rel_stress_tol must be positive, got {}",
                self.rel_stress_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SmacofResult {
    #[serde(skip)]
    pub embedding: Embedding,
    /// Stress of the starting configuration followed by one value per accepted iteration.
    pub stress_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl SmacofResult {
    pub fn final_stress(&self) -> f64 {
        *self.stress_trace.last().expect("trace holds the initial stress")
    }
}

#[derive(Debug, Clone)]
pub struct ClassicalInit {
    pub embedding: Embedding,
    /// Leading eigenvalues of the double-centered matrix, descending.
    pub eigenvalues: Vec<f64>,
    /// Fewer than `dim` positive eigenvalues; the missing axes are zero.
    pub rank_deficient: bool,
}

/// Torgerson scaling: double-center `-D^2 / 2` and keep the `dim` leading
/// eigenpairs. Axes without a positive eigenvalue are zero-filled and flagged.
pub fn classical_init(d: &DistanceMatrix, dim: usize) -> Result<ClassicalInit> {
    let n = d.n();
    check_dim(n, dim)?;
    let sq = d.as_matrix().map(|v| v * v);
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let b = DMatrix::from_fn(n, n, |i, j| -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand));
    let eig = SymmetricEigen::new(b);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let cutoff = 1e-10 * top;
    let mut coords = DMatrix::zeros(n, dim);
    let mut eigenvalues = Vec::with_capacity(dim);
    let mut rank_deficient = false;
    for (axis, &idx) in order.iter().take(dim).enumerate() {
        let lambda = eig.eigenvalues[idx];
        eigenvalues.push(lambda);
        if !(lambda > cutoff) {
            rank_deficient = true;
            continue;
        }
        let v = eig.eigenvectors.column(idx);
        // fix the sign so the output does not depend on solver conventions
        let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        let s = sign * lambda.sqrt();
        for i in 0..n {
            coords[(i, axis)] = v[i] * s;
        }
    }
    Ok(ClassicalInit { embedding: Embedding::new(coords)?, eigenvalues, rank_deficient })
}

fn check_dim(n: usize, dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidParameter("target dimension must be at least 1".into()));
    }
    if dim >= n {
        return Err(Error::InvalidParameter(format!(
            "target dimension {dim} must be smaller than the number of elements {n}"
        )));
    }
    Ok(())
}

pub(crate) fn initial_configuration(d: &DistanceMatrix, dim: usize, cfg: &SolverConfig) -> Result<Embedding> {
    match &cfg.init {
        Init::Classical => Ok(classical_init(d, dim)?.embedding),
        Init::Random => {
            let n = d.n();
            let edges = d.edge_count().max(1) as f64;
            let mean = d.pairs().map(|(i, j)| d.get(i, j)).sum::<f64>() / edges;
            let scale = if mean > 0.0 { mean } else { 1.0 };
            let mut r = rng(cfg.seed);
            Embedding::new(DMatrix::from_fn(n, dim, |_, _| r.random::<f64>() * scale))
        }
        Init::Given(x) => {
            if x.n() != d.n() || x.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "initial embedding is {}x{}, expected {}x{dim}",
                    x.n(),
                    x.dim(),
                    d.n()
                )));
            }
            Ok(x.clone())
        }
    }
}

/// Number of connected components of the graph with an edge wherever `w_ij > 0`.
pub fn weight_components(w: &WeightMatrix) -> usize {
    let n = w.n();
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    let mut components = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        stack.push(start);
        while let Some(u) = stack.pop() {
            for v in 0..n {
                if !seen[v] && v != u && w.get(u, v) > 0.0 {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    components
}

/// Iterates the weighted Guttman transform `X <- V^+ B(X) X` from the
/// configured start.
///
/// `V` is the weighted graph Laplacian. Because `B(X)` has zero row sums,
/// `V^+ B(X) X = (V + 11^T)^{-1} B(X) X`, which is solved once by Cholesky.
pub fn smacof(d: &DistanceMatrix, w: &WeightMatrix, dim: usize, cfg: &SolverConfig) -> Result<SmacofResult> {
    let n = d.n();
    if w.n() != n {
        return Err(Error::DimensionMismatch(format!("distances have {n} elements, weights {}", w.n())));
    }
    check_dim(n, dim)?;
    cfg.validate()?;
    let components = weight_components(w);
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    let x0 = initial_configuration(d, dim, cfg)?;
    run_from(d, w, x0, cfg)
}

fn run_from(d: &DistanceMatrix, w: &WeightMatrix, x0: Embedding, cfg: &SolverConfig) -> Result<SmacofResult> {
    let n = d.n();
    let wm = w.as_matrix();
    let dm = d.as_matrix();
    let mut v = DMatrix::from_element(n, n, 1.0);
    for i in 0..n {
        let mut diag = 1.0;
        for j in 0..n {
            if i != j {
                v[(i, j)] -= wm[(i, j)];
                diag += wm[(i, j)];
            }
        }
        v[(i, i)] = diag;
    }
    let chol = v
        .cholesky()
        .ok_or_else(|| Error::Degenerate("weighted Laplacian is not positive definite".into()))?;

    let mut x = x0.into_coords();
    let dim = x.ncols();
    let mut prev = stress_unchecked(dm, &x, wm);
    let mut trace = vec![prev];
    let mut converged = prev == 0.0;
    let mut b = DMatrix::zeros(n, n);
    let mut iterations = 0;
    while !converged && iterations < cfg.max_iters {
        b.fill(0.0);
        for i in 0..n {
            for j in i + 1..n {
                let wij = wm[(i, j)];
                if wij == 0.0 {
                    continue;
                }
                let mut s = 0.0;
                for k in 0..dim {
                    let t = x[(i, k)] - x[(j, k)];
                    s += t * t;
                }
                let dist = s.sqrt();
                if dist > 0.0 {
                    let bij = -wij * dm[(i, j)] / dist;
                    b[(i, j)] = bij;
                    b[(j, i)] = bij;
                }
            }
        }
        for i in 0..n {
            let row_sum: f64 = (0..n).filter(|&j| j != i).map(|j| b[(i, j)]).sum();
            b[(i, i)] = -row_sum;
        }
        let next = chol.solve(&(&b * &x));
        let stress = stress_unchecked(dm, &next, wm);
        if !stress.is_finite() || stress > prev {
            // rounding at the fixed point; keep the last accepted configuration
            converged = true;
            break;
        }
        x = next;
        trace.push(stress);
        iterations += 1;
        converged = prev == 0.0 || (prev - stress) / prev < cfg.rel_stress_tol;
        prev = stress;
    }
    Ok(SmacofResult { embedding: Embedding::new(x)?, stress_trace: trace, iterations, converged })
}
