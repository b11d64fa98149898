//! Dissimilarity matrices, embeddings, masks and weights, plus the distance,
//! stress and alignment primitives every other module builds on.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Guard used by [`sammon_weights`] when a dissimilarity is zero.
pub const DEFAULT_SAMMON_EPSILON: f64 = 1e-9;

/// Symmetric, nonnegative, zero-diagonal dissimilarities between `n` elements.
///
/// The entries are not required to be metric.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    data: DMatrix<f64>,
}

impl DistanceMatrix {
    /// Validates `data` exactly: symmetric, zero diagonal, finite and nonnegative.
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::NotSquare { rows: data.nrows(), cols: data.ncols() });
        }
        let n = data.nrows();
        for i in 0..n {
            for j in 0..n {
                let v = data[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if v < 0.0 {
                    return Err(Error::Negative { row: i, col: j, value: v });
                }
            }
            if data[(i, i)] != 0.0 {
                return Err(Error::NonZeroDiagonal { index: i, value: data[(i, i)] });
            }
            for j in 0..i {
                if data[(i, j)] != data[(j, i)] {
                    return Err(Error::Asymmetric { row: i, col: j, a: data[(i, j)], b: data[(j, i)] });
                }
            }
        }
        Ok(Self { data })
    }

    /// Accepts a matrix whose mirrored entries agree to within `rel_tol` of
    /// their magnitude and averages each pair into an exactly symmetric result.
    pub fn symmetrized(data: DMatrix<f64>, rel_tol: f64) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::NotSquare { rows: data.nrows(), cols: data.ncols() });
        }
        let n = data.nrows();
        let mut out = data;
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (out[(i, j)], out[(j, i)]);
                if !a.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if !b.is_finite() {
                    return Err(Error::NonFinite { row: j, col: i });
                }
                let scale = a.abs().max(b.abs());
                if (a - b).abs() > rel_tol * scale {
                    return Err(Error::Asymmetric { row: i, col: j, a, b });
                }
                let mean = 0.5 * (a + b);
                out[(i, j)] = mean;
                out[(j, i)] = mean;
            }
        }
        Self::new(out)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// Number of unordered pairs, `n(n-1)/2`.
    pub fn edge_count(&self) -> usize {
        edge_count(self.n())
    }

    /// Unordered pairs `(i, j)` with `i < j`, row-major.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        pairs(self.n())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.data.row(i).iter().copied().collect()).collect()
    }

    /// Writes `value` into both `(i, j)` and `(j, i)`.
    pub(crate) fn set_pair(&mut self, i: usize, j: usize, value: f64) {
        debug_assert!(i != j && value.is_finite() && value >= 0.0);
        self.data[(i, j)] = value;
        self.data[(j, i)] = value;
    }
}

/// `n` points in `dim`-dimensional space, one point per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    coords: DMatrix<f64>,
}

impl Embedding {
    pub fn new(coords: DMatrix<f64>) -> Result<Self> {
        if coords.nrows() == 0 || coords.ncols() == 0 {
            return Err(Error::InvalidParameter(format!(
                "embedding must have at least one point and one dimension, got {}x{}",
                coords.nrows(),
                coords.ncols()
            )));
        }
        check_finite(&coords)?;
        Ok(Self { coords })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub fn n(&self) -> usize {
        self.coords.nrows()
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn coords(&self) -> &DMatrix<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DMatrix<f64> {
        self.coords
    }

    /// Euclidean distance between points `i` and `j`.
    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let mut s = 0.0;
        for k in 0..self.dim() {
            let d = self.coords[(i, k)] - self.coords[(j, k)];
            s += d * d;
        }
        s.sqrt()
    }

    pub fn distances(&self) -> DistanceMatrix {
        pairwise_distances(&self.coords, 2.0).expect("embedding coordinates are finite")
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.coords.row(i).iter().copied().collect()).collect()
    }
}

/// Symmetric keep/remove flags over the edges of the complete graph.
/// `keep(i, i)` is always true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterMask {
    n: usize,
    keep: Vec<bool>,
}

impl FilterMask {
    pub fn all_kept(n: usize) -> Self {
        Self { n, keep: vec![true; n * n] }
    }

    /// Builds a mask from an `n x n` 0/1 matrix (1 = keep).
    pub fn from_keep_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let n = m.nrows();
        let mut mask = Self::all_kept(n);
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                if v != 0.0 && v != 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "mask entries must be 0 or 1, found {v} at ({i}, {j})"
                    )));
                }
                if i != j && (m[(j, i)] != v) {
                    return Err(Error::Asymmetric { row: i, col: j, a: v, b: m[(j, i)] });
                }
                if i != j && v == 0.0 {
                    mask.keep[i * n + j] = false;
                }
            }
        }
        Ok(mask)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn keep(&self, i: usize, j: usize) -> bool {
        self.keep[i * self.n + j]
    }

    pub fn remove(&mut self, i: usize, j: usize) {
        if i != j {
            self.keep[i * self.n + j] = false;
            self.keep[j * self.n + i] = false;
        }
    }

    /// Removed edges `(i, j)`, `i < j`, row-major.
    pub fn removed_pairs(&self) -> Vec<(usize, usize)> {
        pairs(self.n).filter(|&(i, j)| !self.keep(i, j)).collect()
    }

    pub fn removed_count(&self) -> usize {
        pairs(self.n).filter(|&(i, j)| !self.keep(i, j)).count()
    }

    pub fn to_weights(&self) -> WeightMatrix {
        let data = DMatrix::from_fn(self.n, self.n, |i, j| if self.keep(i, j) { 1.0 } else { 0.0 });
        WeightMatrix { data }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| if self.keep(i, j) { 1.0 } else { 0.0 })
    }
}

/// Symmetric nonnegative per-pair stress weights. The diagonal is ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    data: DMatrix<f64>,
}

impl WeightMatrix {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::NotSquare { rows: data.nrows(), cols: data.ncols() });
        }
        check_finite(&data)?;
        let n = data.nrows();
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (data[(i, j)], data[(j, i)]);
                if a < 0.0 {
                    return Err(Error::Negative { row: i, col: j, value: a });
                }
                if a != b {
                    return Err(Error::Asymmetric { row: i, col: j, a, b });
                }
            }
        }
        Ok(Self { data })
    }

    pub fn ones(n: usize) -> Self {
        Self { data: DMatrix::from_element(n, n, 1.0) }
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }
}

pub fn edge_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

pub(crate) fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::DimensionMismatch(format!(
            "row {i} has {} columns, expected {ncols}",
            r.len()
        )));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Minkowski distances of order `p` between the rows of `points`.
pub fn pairwise_distances(points: &DMatrix<f64>, p: f64) -> Result<DistanceMatrix> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("Minkowski order must be finite and >= 1, got {p}")));
    }
    check_finite(points)?;
    let n = points.nrows();
    let dim = points.ncols();
    let mut data = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let d = if p == 2.0 {
                let mut s = 0.0;
                for k in 0..dim {
                    let t = points[(i, k)] - points[(j, k)];
                    s += t * t;
                }
                s.sqrt()
            } else if p == 1.0 {
                (0..dim).map(|k| (points[(i, k)] - points[(j, k)]).abs()).sum()
            } else {
                (0..dim)
                    .map(|k| (points[(i, k)] - points[(j, k)]).abs().powf(p))
                    .sum::<f64>()
                    .powf(1.0 / p)
            };
            data[(i, j)] = d;
            data[(j, i)] = d;
        }
    }
    Ok(DistanceMatrix { data })
}

/// Weighted raw stress `sum_{i<j} w_ij (D_ij - |x_i - x_j|)^2`.
///
/// Each unordered pair is counted once; the `i != j` convention is exactly
/// twice this value.
pub fn raw_stress(d: &DistanceMatrix, x: &Embedding, w: &WeightMatrix) -> Result<f64> {
    if d.n() != x.n() || d.n() != w.n() {
        return Err(Error::DimensionMismatch(format!(
            "distances have {} elements, embedding {}, weights {}",
            d.n(),
            x.n(),
            w.n()
        )));
    }
    Ok(stress_unchecked(d.as_matrix(), x.coords(), w.as_matrix()))
}

pub(crate) fn stress_unchecked(d: &DMatrix<f64>, x: &DMatrix<f64>, w: &DMatrix<f64>) -> f64 {
    let n = d.nrows();
    let dim = x.ncols();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let wij = w[(i, j)];
            if wij == 0.0 {
                continue;
            }
            let mut s = 0.0;
            for k in 0..dim {
                let t = x[(i, k)] - x[(j, k)];
                s += t * t;
            }
            let r = d[(i, j)] - s.sqrt();
            total += wij * r * r;
        }
    }
    total
}

/// Sammon weights `1 / max(D_ij, epsilon)`.
pub fn sammon_weights(d: &DistanceMatrix, epsilon: f64) -> WeightMatrix {
    let n = d.n();
    let data = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 / d.get(i, j).max(epsilon) });
    WeightMatrix { data }
}

/// Similarity transform (translation, orthogonal map, uniform scale) that
/// best maps `x` onto `reference` in the least-squares sense.
#[derive(Debug, Clone, Serialize)]
pub struct ProcrustesFit {
    pub scale: f64,
    /// Sum of squared residuals after alignment.
    pub residual: f64,
}

/// Aligns `x` to `reference` by the least-squares similarity transform.
pub fn procrustes_align(x: &Embedding, reference: &DMatrix<f64>) -> Result<Embedding> {
    procrustes_fit(x, reference).map(|(e, _)| e)
}

pub fn procrustes_fit(x: &Embedding, reference: &DMatrix<f64>) -> Result<(Embedding, ProcrustesFit)> {
    if x.n() != reference.nrows() || x.dim() != reference.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "embedding is {}x{}, reference is {}x{}",
            x.n(),
            x.dim(),
            reference.nrows(),
            reference.ncols()
        )));
    }
    check_finite(reference)?;
    let xc = centered(x.coords());
    let rc = centered(reference);
    let x_norm2 = xc.norm_squared();
    if x_norm2 == 0.0 || rc.norm_squared() == 0.0 {
        return Err(Error::Degenerate("all points coincide; alignment is undefined".into()));
    }
    // maximize tr(R^T Xc^T Rc) over orthogonal R
    let cross = xc.transpose() * &rc;
    let svd = cross.svd(true, true);
    let (u, v_t) = (svd.u.expect("requested U"), svd.v_t.expect("requested V^T"));
    let rotation = &u * &v_t;
    let scale = svd.singular_values.sum() / x_norm2;
    let ref_mean = column_means(reference);
    let mut aligned = (xc * rotation) * scale;
    for mut row in aligned.row_iter_mut() {
        row += &ref_mean;
    }
    let residual = (&aligned - reference).norm_squared();
    Ok((Embedding::new(aligned)?, ProcrustesFit { scale, residual }))
}

fn column_means(m: &DMatrix<f64>) -> nalgebra::RowDVector<f64> {
    m.row_mean()
}

pub(crate) fn centered(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mean = column_means(m);
    let mut out = m.clone();
    for mut row in out.row_iter_mut() {
        row -= &mean;
    }
    out
}
