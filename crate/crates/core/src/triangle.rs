//! Broken-triangle counting and the histogram threshold that turns counts
//! into an outlier mask.
//!
//! Every edge `(i, j)` of the complete graph closes `n - 2` triangles. An edge
//! whose length is badly wrong tends to violate the triangle inequality in
//! many of them, while a correct edge seldom does. Counting violations per
//! edge, then cutting the count histogram where its low-count bulk ends and
//! the high-count tail begins, separates the two populations without a
//! user-chosen parameter.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{pairs, DistanceMatrix, FilterMask};
use crate::seed::{edge_seed, rng};

/// Relative slack below which `d1 + d2 < d3` is not treated as a violation.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Per-edge broken-triangle counts and the number of triangles examined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleCounts {
    n: usize,
    count: Vec<u32>,
    tested: Vec<u32>,
}

impl TriangleCounts {
    fn zeros(n: usize) -> Self {
        Self { n, count: vec![0; n * n], tested: vec![0; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.count[i * self.n + j]
    }

    #[inline]
    pub fn tested(&self, i: usize, j: usize) -> u32 {
        self.tested[i * self.n + j]
    }

    pub fn max_count(&self) -> u32 {
        self.count.iter().copied().max().unwrap_or(0)
    }

    /// `(i, j, count)` for every unordered edge, row-major.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        pairs(self.n).map(move |(i, j)| (i, j, self.count(i, j)))
    }

    fn set(&mut self, i: usize, j: usize, count: u32, tested: u32) {
        let n = self.n;
        self.count[i * n + j] = count;
        self.count[j * n + i] = count;
        self.tested[i * n + j] = tested;
        self.tested[j * n + i] = tested;
    }
}

/// `bins[b]` is the number of edges in exactly `b` broken triangles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakHistogram {
    pub bins: BTreeMap<u32, usize>,
    pub edge_total: usize,
}

impl BreakHistogram {
    /// Bin height, zero for bins never observed.
    pub fn get(&self, b: u32) -> usize {
        self.bins.get(&b).copied().unwrap_or(0)
    }

    pub fn max_bin(&self) -> u32 {
        self.bins.keys().next_back().copied().unwrap_or(0)
    }

    /// Number of edges with count strictly greater than `phi`.
    pub fn mass_above(&self, phi: u32) -> usize {
        self.bins.range(phi + 1..).map(|(_, &c)| c).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Threshold {
    pub phi: u32,
    /// True when no bin satisfied both conditions and nothing is filtered.
    pub fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FilterMode {
    /// Every triangle, attributed to all three of its edges.
    Exact,
    /// `per_edge` third vertices per edge, drawn without replacement.
    Sampled { per_edge: usize, seed: u64 },
}

/// Tests a triangle with sides in any order.
pub fn is_broken(d1: f64, d2: f64, d3: f64, rel_tol: f64) -> Result<bool> {
    for v in [d1, d2, d3] {
        if !(v >= 0.0) {
            return Err(Error::InvalidParameter(format!("triangle sides must be nonnegative, got {v}")));
        }
    }
    Ok(broken(d1, d2, d3, rel_tol))
}

#[inline]
fn broken(a: f64, b: f64, c: f64, rel_tol: f64) -> bool {
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let (mid, top) = if hi <= c { (hi, c) } else { (c, hi) };
    let (short, mid) = if lo <= mid { (lo, mid) } else { (mid, lo) };
    short + mid < top * (1.0 - rel_tol)
}

fn require_three(d: &DistanceMatrix) -> Result<()> {
    if d.n() < 3 {
        return Err(Error::TooFewElements { required: 3, actual: d.n() });
    }
    Ok(())
}

/// Examines all `C(n, 3)` triangles.
pub fn count_broken_exact(d: &DistanceMatrix, rel_tol: f64) -> Result<TriangleCounts> {
    require_three(d)?;
    let n = d.n();
    let m = d.as_matrix();
    // integer sums commute, so the parallel reduction equals the sequential one
    let upper = (0..n)
        .into_par_iter()
        .fold(
            || vec![0u32; n * n],
            |mut acc, i| {
                for j in i + 1..n {
                    let dij = m[(i, j)];
                    for k in j + 1..n {
                        if broken(dij, m[(j, k)], m[(i, k)], rel_tol) {
                            acc[i * n + j] += 1;
                            acc[j * n + k] += 1;
                            acc[i * n + k] += 1;
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u32; n * n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut tc = TriangleCounts::zeros(n);
    let all = (n - 2) as u32;
    for (i, j) in pairs(n) {
        tc.set(i, j, upper[i * n + j], all);
    }
    Ok(tc)
}

/// Samples `min(per_edge, n - 2)` third vertices per edge, without
/// replacement, from a stream seeded by `(seed, i, j)`. A broken triangle is
/// credited only to the edge that sampled it.
pub fn count_broken_sampled(
    d: &DistanceMatrix,
    per_edge: usize,
    seed: u64,
    rel_tol: f64,
) -> Result<TriangleCounts> {
    require_three(d)?;
    if per_edge == 0 {
        return Err(Error::InvalidParameter("triangles per edge must be at least 1".into()));
    }
    let n = d.n();
    let m = d.as_matrix();
    let take = per_edge.min(n - 2);
    let edges: Vec<(usize, usize)> = pairs(n).collect();
    let counts: Vec<u32> = edges
        .par_iter()
        .map(|&(i, j)| {
            let mut r = rng(edge_seed(seed, i, j));
            let dij = m[(i, j)];
            rand::seq::index::sample(&mut r, n - 2, take)
                .into_iter()
                .map(|v| {
                    // skip the two endpoints
                    let mut k = v;
                    if k >= i {
                        k += 1;
                    }
                    if k >= j {
                        k += 1;
                    }
                    k
                })
                .filter(|&k| broken(dij, m[(i, k)], m[(j, k)], rel_tol))
                .count() as u32
        })
        .collect();
    let mut tc = TriangleCounts::zeros(n);
    for (&(i, j), &c) in edges.iter().zip(&counts) {
        tc.set(i, j, c, take as u32);
    }
    Ok(tc)
}

/// `min(n - 2, max(45, 2 * expected_outliers / n))`.
pub fn default_triangles_per_edge(n: usize, expected_outliers: usize) -> usize {
    let rule = 2 * expected_outliers / n.max(1);
    rule.max(45).min(n.saturating_sub(2)).max(1)
}

pub fn build_histogram(tc: &TriangleCounts) -> BreakHistogram {
    let mut bins = BTreeMap::new();
    let mut edge_total = 0;
    for (_, _, c) in tc.edges() {
        *bins.entry(c).or_insert(0) += 1;
        edge_total += 1;
    }
    BreakHistogram { bins, edge_total }
}

/// Smallest `phi` whose cumulative mass `sum_{b <= phi} H(b)` reaches half the
/// edges and where the next bin rises, `H(phi + 1) > H(phi)`.
///
/// The cumulative sum starts at `b = 0`. Missing bins count as zero. If no
/// bin qualifies, returns the largest observed count with `fallback` set,
/// which filters nothing.
pub fn select_threshold(h: &BreakHistogram) -> Threshold {
    let max_bin = h.max_bin();
    let mut cumulative = 0usize;
    for phi in 0..=max_bin {
        let here = h.get(phi);
        cumulative += here;
        if 2 * cumulative >= h.edge_total && h.get(phi + 1) > here {
            return Threshold { phi, fallback: false };
        }
    }
    Threshold { phi: max_bin, fallback: true }
}

/// Keeps edges with `count <= phi`.
pub fn filter_mask(tc: &TriangleCounts, phi: u32) -> FilterMask {
    let mut mask = FilterMask::all_kept(tc.n());
    for (i, j, c) in tc.edges() {
        if c > phi {
            mask.remove(i, j);
        }
    }
    mask
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlaggedEdge {
    pub i: usize,
    pub j: usize,
    pub count: u32,
}

/// JSON-facing summary of one filtering run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterDiagnostics {
    pub mode: FilterMode,
    pub rel_tol: f64,
    pub histogram: BreakHistogram,
    pub phi: u32,
    pub fallback: bool,
    pub flagged: Vec<FlaggedEdge>,
}

#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub mode: FilterMode,
    pub rel_tol: f64,
    pub counts: TriangleCounts,
    pub histogram: BreakHistogram,
    pub threshold: Threshold,
    pub mask: FilterMask,
}

impl FilterOutcome {
    pub fn diagnostics(&self) -> FilterDiagnostics {
        let flagged = self
            .counts
            .edges()
            .filter(|&(i, j, _)| !self.mask.keep(i, j))
            .map(|(i, j, count)| FlaggedEdge { i, j, count })
            .collect();
        FilterDiagnostics {
            mode: self.mode,
            rel_tol: self.rel_tol,
            histogram: self.histogram.clone(),
            phi: self.threshold.phi,
            fallback: self.threshold.fallback,
            flagged,
        }
    }
}

pub fn count_broken(d: &DistanceMatrix, mode: FilterMode, rel_tol: f64) -> Result<TriangleCounts> {
    match mode {
        FilterMode::Exact => count_broken_exact(d, rel_tol),
        FilterMode::Sampled { per_edge, seed } => count_broken_sampled(d, per_edge, seed, rel_tol),
    }
}

/// Counting, histogram, threshold and mask in one pass.
pub fn tmds_filter(d: &DistanceMatrix, mode: FilterMode, rel_tol: f64) -> Result<FilterOutcome> {
    let counts = count_broken(d, mode, rel_tol)?;
    let histogram = build_histogram(&counts);
    let threshold = select_threshold(&histogram);
    let mask = filter_mask(&counts, threshold.phi);
    Ok(FilterOutcome { mode, rel_tol, counts, histogram, threshold, mask })
}
