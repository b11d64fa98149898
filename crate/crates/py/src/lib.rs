//! Python bindings. Matrices cross the boundary as lists of rows.

use nalgebra::DMatrix;
use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use trimds::{FilterMode, Init, SolverConfig};

fn err(e: trimds::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn check_index(n: usize, i: usize, j: usize) -> PyResult<()> {
    if i >= n || j >= n {
        return Err(PyIndexError::new_err(format!("({i}, {j}) out of range for n = {n}")));
    }
    Ok(())
}

#[pyclass(name = "DistanceMatrix", module = "pytrimds", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDistanceMatrix(trimds::DistanceMatrix);

#[pymethods]
impl PyDistanceMatrix {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        trimds::DistanceMatrix::from_rows(&rows).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        check_index(self.0.n(), i, j)?;
        Ok(self.0.get(i, j))
    }

    fn tolist(&self) -> Vec<Vec<f64>> {
        self.0.to_rows()
    }

    fn __len__(&self) -> usize {
        self.0.n()
    }

    fn __repr__(&self) -> String {
        format!("DistanceMatrix(n={})", self.0.n())
    }
}

#[pyclass(name = "Embedding", module = "pytrimds", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyEmbedding(trimds::Embedding);

#[pymethods]
impl PyEmbedding {
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        trimds::Embedding::from_rows(&rows).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn distances(&self) -> PyDistanceMatrix {
        PyDistanceMatrix(self.0.distances())
    }

    fn tolist(&self) -> Vec<Vec<f64>> {
        self.0.to_rows()
    }

    fn __repr__(&self) -> String {
        format!("Embedding(n={}, dim={})", self.0.n(), self.0.dim())
    }
}

/// Which pairs survive filtering.
#[pyclass(name = "FilterMask", module = "pytrimds", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyFilterMask(trimds::FilterMask);

#[pymethods]
impl PyFilterMask {
    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn keep(&self, i: usize, j: usize) -> PyResult<bool> {
        check_index(self.0.n(), i, j)?;
        Ok(self.0.keep(i, j))
    }

    fn removed_pairs(&self) -> Vec<(usize, usize)> {
        self.0.removed_pairs()
    }

    fn removed_count(&self) -> usize {
        self.0.removed_count()
    }

    fn tolist(&self) -> Vec<Vec<f64>> {
        to_rows(&self.0.to_matrix())
    }

    fn __repr__(&self) -> String {
        format!("FilterMask(n={}, removed={})", self.0.n(), self.0.removed_count())
    }
}

#[pyclass(name = "FilterResult", module = "pytrimds", frozen, get_all)]
struct PyFilterResult {
    mask: PyFilterMask,
    phi: u32,
    fallback: bool,
    /// `histogram[b]`: edges in exactly `b` broken triangles.
    histogram: Vec<usize>,
    counts: Vec<Vec<u32>>,
}

#[pyclass(name = "SmacofFit", module = "pytrimds", frozen, get_all)]
struct PySmacofFit {
    embedding: PyEmbedding,
    stress_trace: Vec<f64>,
    final_stress: f64,
    iterations: usize,
    converged: bool,
}

impl From<trimds::SmacofResult> for PySmacofFit {
    fn from(r: trimds::SmacofResult) -> Self {
        PySmacofFit {
            final_stress: r.final_stress(),
            stress_trace: r.stress_trace,
            iterations: r.iterations,
            converged: r.converged,
            embedding: PyEmbedding(r.embedding),
        }
    }
}

#[pyclass(name = "TmdsFit", module = "pytrimds", frozen, get_all)]
struct PyTmdsFit {
    embedding: PyEmbedding,
    mask: PyFilterMask,
    phi: u32,
    effective_phi: u32,
    reconnected: bool,
    final_stress: f64,
    iterations: usize,
    converged: bool,
}

#[pyclass(name = "Fg12Fit", module = "pytrimds", frozen, get_all)]
struct PyFg12Fit {
    embedding: PyEmbedding,
    outlier_pairs: Vec<(usize, usize)>,
    nonzero_count: usize,
    objective_trace: Vec<f64>,
    outer_iterations: usize,
}

fn filter_mode(mode: &str, per_edge: Option<usize>, seed: u64, n: usize) -> PyResult<FilterMode> {
    match mode {
        "exact" => Ok(FilterMode::Exact),
        "sampled" => Ok(FilterMode::Sampled {
            per_edge: per_edge.unwrap_or_else(|| trimds::triangle::default_triangles_per_edge(n, 0)),
            seed,
        }),
        other => Err(PyValueError::new_err(format!("mode must be 'exact' or 'sampled', got {other:?}"))),
    }
}

fn solver(init: &str, max_iters: usize, rel_tol: f64, seed: u64) -> PyResult<SolverConfig> {
    let init = match init {
        "classical" => Init::Classical,
        "random" => Init::Random,
        other => return Err(PyValueError::new_err(format!("init must be 'classical' or 'random', got {other:?}"))),
    };
    Ok(SolverConfig { max_iters, rel_stress_tol: rel_tol, init, seed })
}

#[pyfunction]
#[pyo3(signature = (points, p = 2.0))]
fn pairwise_distances(points: Vec<Vec<f64>>, p: f64) -> PyResult<PyDistanceMatrix> {
    trimds::pairwise_distances(&matrix(&points)?, p).map(PyDistanceMatrix).map_err(err)
}

#[pyfunction]
fn sample_hypercube(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    to_rows(&trimds::sample_hypercube(n, dim, seed))
}

/// Replaces `m` random pairs with uniform values; returns the new matrix
/// and the replaced pairs.
#[pyfunction]
fn inject_outliers(d: &PyDistanceMatrix, m: usize, seed: u64) -> PyResult<(PyDistanceMatrix, Vec<(usize, usize)>)> {
    let (out, pairs) = trimds::inject_outliers(&d.0, m, seed).map_err(err)?;
    Ok((PyDistanceMatrix(out), pairs))
}

#[pyfunction]
#[pyo3(signature = (d, sigma, centering = "mean", seed = 0))]
fn lognormal_distort(d: &PyDistanceMatrix, sigma: f64, centering: &str, seed: u64) -> PyResult<PyDistanceMatrix> {
    let c = match centering {
        "mean" => trimds::Centering::Mean,
        "median" => trimds::Centering::Median,
        other => return Err(PyValueError::new_err(format!("centering must be 'mean' or 'median', got {other:?}"))),
    };
    trimds::lognormal_distort(&d.0, sigma, c, seed).map(PyDistanceMatrix).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (d, *, mode = "exact", per_edge = None, seed = 0, rel_tol = trimds::DEFAULT_REL_TOL))]
fn tmds_filter(d: &PyDistanceMatrix, mode: &str, per_edge: Option<usize>, seed: u64, rel_tol: f64) -> PyResult<PyFilterResult> {
    let n = d.0.n();
    let f = trimds::tmds_filter(&d.0, filter_mode(mode, per_edge, seed, n)?, rel_tol).map_err(err)?;
    let counts = (0..n).map(|i| (0..n).map(|j| if i == j { 0 } else { f.counts.count(i, j) }).collect()).collect();
    Ok(PyFilterResult {
        phi: f.threshold.phi,
        fallback: f.threshold.fallback,
        histogram: (0..=f.histogram.max_bin()).map(|b| f.histogram.get(b)).collect(),
        counts,
        mask: PyFilterMask(f.mask),
    })
}

/// Weighted SMACOF; `weights` defaults to all ones.
#[pyfunction]
#[pyo3(signature = (d, weights = None, dim = 2, *, init = "classical", max_iters = 300, rel_tol = 1e-6, seed = 0))]
fn smacof(
    d: &PyDistanceMatrix,
    weights: Option<Vec<Vec<f64>>>,
    dim: usize,
    init: &str,
    max_iters: usize,
    rel_tol: f64,
    seed: u64,
) -> PyResult<PySmacofFit> {
    let w = match weights {
        Some(rows) => trimds::WeightMatrix::new(matrix(&rows)?).map_err(err)?,
        None => trimds::WeightMatrix::ones(d.0.n()),
    };
    let cfg = solver(init, max_iters, rel_tol, seed)?;
    trimds::smacof(&d.0, &w, dim, &cfg).map(Into::into).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (d, dim = 2, *, init = "classical", max_iters = 300, rel_tol = 1e-6, seed = 0))]
fn sammon_embed(d: &PyDistanceMatrix, dim: usize, init: &str, max_iters: usize, rel_tol: f64, seed: u64) -> PyResult<PySmacofFit> {
    let cfg = solver(init, max_iters, rel_tol, seed)?;
    trimds::sammon_embed(&d.0, dim, &cfg).map(Into::into).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (
    d, dim = 2, *, mode = "exact", per_edge = None, tol = trimds::DEFAULT_REL_TOL,
    init = "classical", max_iters = 300, rel_tol = 1e-6, seed = 0
))]
#[allow(clippy::too_many_arguments)]
fn tmds_embed(
    d: &PyDistanceMatrix,
    dim: usize,
    mode: &str,
    per_edge: Option<usize>,
    tol: f64,
    init: &str,
    max_iters: usize,
    rel_tol: f64,
    seed: u64,
) -> PyResult<PyTmdsFit> {
    let mode = filter_mode(mode, per_edge, seed, d.0.n())?;
    let cfg = solver(init, max_iters, rel_tol, seed)?;
    let r = trimds::tmds_embed(&d.0, dim, mode, tol, &cfg).map_err(err)?;
    Ok(PyTmdsFit {
        phi: r.filter.threshold.phi,
        effective_phi: r.effective_phi,
        reconnected: r.reconnected,
        final_stress: r.solve.final_stress(),
        iterations: r.solve.iterations,
        converged: r.solve.converged,
        mask: PyFilterMask(r.mask),
        embedding: PyEmbedding(r.solve.embedding),
    })
}

#[pyfunction]
#[pyo3(signature = (d, lam, dim = 2, *, init = "classical", max_iters = 300, rel_tol = 1e-6, seed = 0))]
fn fg12_embed(
    d: &PyDistanceMatrix,
    lam: f64,
    dim: usize,
    init: &str,
    max_iters: usize,
    rel_tol: f64,
    seed: u64,
) -> PyResult<PyFg12Fit> {
    let cfg = solver(init, max_iters, rel_tol, seed)?;
    let r = trimds::fg12_embed(&d.0, dim, lam, &cfg).map_err(err)?;
    Ok(PyFg12Fit {
        outlier_pairs: r.outlier_pairs(),
        nonzero_count: r.nonzero_count,
        objective_trace: r.objective_trace,
        outer_iterations: r.outer_iterations,
        embedding: PyEmbedding(r.embedding),
    })
}

/// Mean absolute log-ratio of embedded to reference distances.
#[pyfunction]
fn embedding_score(reference: &PyDistanceMatrix, x: &PyEmbedding) -> PyResult<f64> {
    trimds::embedding_score(&reference.0, &x.0).map(|s| s.score).map_err(err)
}

#[pyfunction]
fn detection_report<'py>(py: Python<'py>, mask: &PyFilterMask, truth: Vec<(usize, usize)>) -> PyResult<Bound<'py, PyDict>> {
    let r = trimds::detection_report(&mask.0, &truth).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("true_positives", r.true_positives)?;
    out.set_item("false_positives", r.false_positives)?;
    out.set_item("false_negatives", r.false_negatives)?;
    out.set_item("true_negatives", r.true_negatives)?;
    out.set_item("precision", r.precision)?;
    out.set_item("recall", r.recall)?;
    Ok(out)
}

#[pyfunction]
fn break_probability_theory(dim: usize) -> f64 {
    trimds::break_probability_theory(dim)
}

/// Returns `(estimate, halfwidth)`; the halfwidth is a 95% interval.
#[pyfunction]
#[pyo3(signature = (dim, trials = 1_000_000, seed = 0))]
fn break_probability_mc(dim: usize, trials: usize, seed: u64) -> (f64, f64) {
    let e = trimds::break_probability_mc(dim, trials, seed);
    (e.estimate, e.halfwidth)
}

#[pymodule]
fn pytrimds(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDistanceMatrix>()?;
    m.add_class::<PyEmbedding>()?;
    m.add_class::<PyFilterMask>()?;
    m.add_class::<PyFilterResult>()?;
    m.add_class::<PySmacofFit>()?;
    m.add_class::<PyTmdsFit>()?;
    m.add_class::<PyFg12Fit>()?;
    m.add_function(wrap_pyfunction!(pairwise_distances, m)?)?;
    m.add_function(wrap_pyfunction!(sample_hypercube, m)?)?;
    m.add_function(wrap_pyfunction!(inject_outliers, m)?)?;
    m.add_function(wrap_pyfunction!(lognormal_distort, m)?)?;
    m.add_function(wrap_pyfunction!(tmds_filter, m)?)?;
    m.add_function(wrap_pyfunction!(smacof, m)?)?;
    m.add_function(wrap_pyfunction!(sammon_embed, m)?)?;
    m.add_function(wrap_pyfunction!(tmds_embed, m)?)?;
    m.add_function(wrap_pyfunction!(fg12_embed, m)?)?;
    m.add_function(wrap_pyfunction!(embedding_score, m)?)?;
    m.add_function(wrap_pyfunction!(detection_report, m)?)?;
    m.add_function(wrap_pyfunction!(break_probability_theory, m)?)?;
    m.add_function(wrap_pyfunction!(break_probability_mc, m)?)?;
    Ok(())
}
