//! Seeded ground-truth scenarios: point generators, outlier injection,
//! log-normal distortion and single-edge deformation.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::metric::{edge_count, pairs, pairwise_distances, DistanceMatrix};
use crate::seed::{derive_seed, rng};

/// I.i.d. uniform points in `[0, 1]^dim`.
pub fn sample_hypercube(n: usize, dim: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    // row-major draw order, independent of nalgebra's storage layout
    let mut m = DMatrix::zeros(n, dim);
    for i in 0..n {
        for k in 0..dim {
            m[(i, k)] = r.random::<f64>();
        }
    }
    m
}

/// Replaces `m` distinct unordered pairs, each with the value of a uniformly
/// drawn off-diagonal entry of the original matrix. Returns the modified
/// matrix and the chosen pairs in ascending order.
pub fn inject_outliers(d: &DistanceMatrix, m: usize, seed: u64) -> Result<(DistanceMatrix, Vec<(usize, usize)>)> {
    let edges: Vec<(usize, usize)> = d.pairs().collect();
    if m > edges.len() {
        return Err(Error::InvalidParameter(format!(
            "cannot inject {m} outliers into {} pairs",
            edges.len()
        )));
    }
    let mut r = rng(seed);
    let chosen = rand::seq::index::sample(&mut r, edges.len(), m).into_vec();
    let mut out = d.clone();
    for &e in &chosen {
        let (i, j) = edges[e];
        let (a, b) = edges[r.random_range(0..edges.len())];
        out.set_pair(i, j, d.get(a, b));
    }
    let mut set: Vec<(usize, usize)> = chosen.into_iter().map(|e| edges[e]).collect();
    set.sort_unstable();
    Ok((out, set))
}

/// Which statistic of the log-normal factor is pinned to 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// `exp(N(-sigma^2 / 2, sigma^2))`: the factor itself has mean 1.
    #[default]
    Mean,
    /// `exp(N(0, sigma^2))`: the factor has median 1.
    Median,
}

impl Centering {
    pub fn log_location(self, sigma: f64) -> f64 {
        match self {
            Centering::Median => 0.0,
            Centering::Mean => -0.5 * sigma * sigma,
        }
    }
}

/// Multiplies every pair by an independent log-normal factor with log-scale
/// `sigma`, centered as `centering` says.
pub fn lognormal_distort(d: &DistanceMatrix, sigma: f64, centering: Centering, seed: u64) -> Result<DistanceMatrix> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!("sigma must be finite and >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(d.clone());
    }
    let law = lognormal_factor(sigma, centering)?;
    let mut r = rng(seed);
    let mut out = d.clone();
    for (i, j) in d.pairs() {
        out.set_pair(i, j, d.get(i, j) * law.sample(&mut r));
    }
    Ok(out)
}

pub fn lognormal_factor(sigma: f64, centering: Centering) -> Result<LogNormal<f64>> {
    LogNormal::new(centering.log_location(sigma), sigma).map_err(|e| Error::InvalidParameter(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    /// Two perpendicular segments `[-1, 1] x {0}` and `{0} x [-1, 1]`.
    Plus,
    /// Three turns of the Archimedean spiral `r = 0.1 + theta / (2 pi)`.
    Spiral,
}

const SPIRAL_TURNS: f64 = 3.0;

/// 2D structured point sets with optional isotropic Gaussian jitter.
pub fn shape_points(kind: ShapeKind, n: usize, jitter: f64, seed: u64) -> Result<DMatrix<f64>> {
    if n < 4 {
        return Err(Error::TooFewElements { required: 4, actual: n });
    }
    if !(jitter >= 0.0) || !jitter.is_finite() {
        return Err(Error::InvalidParameter(format!("jitter must be finite and >= 0, got {jitter}")));
    }
    let mut r = rng(seed);
    let mut m = DMatrix::zeros(n, 2);
    for i in 0..n {
        let (x, y) = match kind {
            ShapeKind::Plus => {
                let t = r.random_range(-1.0..=1.0);
                if r.random::<bool>() {
                    (t, 0.0)
                } else {
                    (0.0, t)
                }
            }
            ShapeKind::Spiral => {
                let theta = r.random::<f64>() * SPIRAL_TURNS * 2.0 * PI;
                let radius = spiral_radius(theta);
                (radius * theta.cos(), radius * theta.sin())
            }
        };
        m[(i, 0)] = x;
        m[(i, 1)] = y;
    }
    if jitter > 0.0 {
        let noise = Normal::new(0.0, jitter).map_err(|e| Error::InvalidParameter(e.to_string()))?;
        for i in 0..n {
            for k in 0..2 {
                m[(i, k)] += noise.sample(&mut r);
            }
        }
    }
    Ok(m)
}

pub fn spiral_radius(theta: f64) -> f64 {
    0.1 + theta / (2.0 * PI)
}

/// Scales the single pair `(i, j)` by `2^log2_factor`.
pub fn deform_edge(d: &DistanceMatrix, i: usize, j: usize, log2_factor: f64) -> Result<DistanceMatrix> {
    if i == j || i >= d.n() || j >= d.n() {
        return Err(Error::InvalidParameter(format!("({i}, {j}) is not an off-diagonal pair of a {0}x{0} matrix", d.n())));
    }
    if !log2_factor.is_finite() {
        return Err(Error::InvalidParameter(format!("log2 factor must be finite, got {log2_factor}")));
    }
    let mut out = d.clone();
    out.set_pair(i, j, d.get(i, j) * log2_factor.exp2());
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointSource {
    Hypercube { n: usize, dim: usize },
    Shape { shape: ShapeKind, n: usize, jitter: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distortion {
    None,
    /// `count` injected outliers.
    Outliers { count: usize },
    LogNormal {
        sigma: f64,
        #[serde(default)]
        centering: Centering,
    },
}

/// Generator parameters; together with the seed they determine a scenario
/// completely.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub points: PointSource,
    /// Multiplies all coordinates after sampling.
    #[serde(default = "unit_scale")]
    pub scale: f64,
    pub distortion: Distortion,
    pub seed: u64,
}

fn unit_scale() -> f64 {
    1.0
}

impl ScenarioSpec {
    pub fn hypercube(n: usize, dim: usize, distortion: Distortion, seed: u64) -> Self {
        Self { points: PointSource::Hypercube { n, dim }, scale: 1.0, distortion, seed }
    }

    /// `floor(rate * n(n-1)/2)` injected outliers on hypercube points.
    pub fn hypercube_with_rate(n: usize, dim: usize, rate: f64, seed: u64) -> Self {
        Self::hypercube(n, dim, Distortion::Outliers { count: outlier_count(n, rate) }, seed)
    }

    pub fn n(&self) -> usize {
        match self.points {
            PointSource::Hypercube { n, .. } | PointSource::Shape { n, .. } => n,
        }
    }
}

pub fn outlier_count(n: usize, rate: f64) -> usize {
    (rate * edge_count(n) as f64 + 1e-9).floor() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthScenario {
    pub points: DMatrix<f64>,
    pub true_d: DistanceMatrix,
    pub observed_d: DistanceMatrix,
    /// Distorted pairs `(i, j)`, `i < j`: the injected set, or every pair
    /// under log-normal distortion.
    pub outliers: Vec<(usize, usize)>,
    pub spec: ScenarioSpec,
}

impl GroundTruthScenario {
    pub fn generate(spec: ScenarioSpec) -> Result<Self> {
        let point_seed = derive_seed(spec.seed, "points", 0);
        let distortion_seed = derive_seed(spec.seed, "distortion", 0);
        let mut points = match spec.points {
            PointSource::Hypercube { n, dim } => {
                if n == 0 || dim == 0 {
                    return Err(Error::InvalidParameter("hypercube needs n >= 1 and dim >= 1".into()));
                }
                sample_hypercube(n, dim, point_seed)
            }
            PointSource::Shape { shape, n, jitter } => shape_points(shape, n, jitter, point_seed)?,
        };
        if !(spec.scale > 0.0) || !spec.scale.is_finite() {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {}", spec.scale)));
        }
        if spec.scale != 1.0 {
            points *= spec.scale;
        }
        let true_d = pairwise_distances(&points, 2.0)?;
        let (observed_d, outliers) = match spec.distortion {
            Distortion::None => (true_d.clone(), Vec::new()),
            Distortion::Outliers { count } => inject_outliers(&true_d, count, distortion_seed)?,
            Distortion::LogNormal { sigma, centering } => {
                let out = lognormal_distort(&true_d, sigma, centering, distortion_seed)?;
                let all = if sigma > 0.0 { pairs(true_d.n()).collect() } else { Vec::new() };
                (out, all)
            }
        };
        Ok(Self { points, true_d, observed_d, outliers, spec })
    }

    pub fn n(&self) -> usize {
        self.true_d.n()
    }

    /// Writes `points.csv`, `true_d.csv`, `observed_d.csv`, `outliers.json`
    /// and `meta.json` into `dir`, creating it if needed.
    pub fn write_bundle(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        io::save_points(dir.join(POINTS_FILE), &self.points)?;
        io::save_distance_matrix(dir.join(TRUE_D_FILE), &self.true_d)?;
        io::save_distance_matrix(dir.join(OBSERVED_D_FILE), &self.observed_d)?;
        let pairs: Vec<[usize; 2]> = self.outliers.iter().map(|&(i, j)| [i, j]).collect();
        fs::write(dir.join(OUTLIERS_FILE), serde_json::to_string(&pairs)? + "\n")?;
        let meta = BundleMeta { generator: "trimds", spec: self.spec };
        fs::write(dir.join(META_FILE), serde_json::to_string_pretty(&meta)? + "\n")?;
        Ok(())
    }

    pub fn read_bundle(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let points = io::load_points(dir.join(POINTS_FILE))?;
        let true_d = io::load_distance_matrix(dir.join(TRUE_D_FILE))?;
        let observed_d = io::load_distance_matrix(dir.join(OBSERVED_D_FILE))?;
        let pairs: Vec<[usize; 2]> = serde_json::from_str(&fs::read_to_string(dir.join(OUTLIERS_FILE))?)?;
        let meta: OwnedBundleMeta = serde_json::from_str(&fs::read_to_string(dir.join(META_FILE))?)?;
        if true_d.n() != observed_d.n() || points.nrows() != true_d.n() {
            return Err(Error::DimensionMismatch(format!(
                "bundle has {} points, true_d {}x{0}, observed_d {}x{2}",
                points.nrows(),
                true_d.n(),
                observed_d.n()
            )));
        }
        Ok(Self { points, true_d, observed_d, outliers: pairs.into_iter().map(|[i, j]| (i, j)).collect(), spec: meta.spec })
    }
}

pub const POINTS_FILE: &str = "points.csv";
pub const TRUE_D_FILE: &str = "true_d.csv";
pub const OBSERVED_D_FILE: &str = "observed_d.csv";
pub const OUTLIERS_FILE: &str = "outliers.json";
pub const META_FILE: &str = "meta.json";

#[derive(Serialize)]
struct BundleMeta {
    generator: &'static str,
    #[serde(flatten)]
    spec: ScenarioSpec,
}

#[derive(Deserialize)]
struct OwnedBundleMeta {
    #[serde(flatten)]
    spec: ScenarioSpec,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypercube_is_uniform_and_deterministic() {
        let p = sample_hypercube(1000, 2, 11);
        for k in 0..2 {
            let mean = p.column(k).mean();
            assert!((0.47..=0.53).contains(&mean), "{mean}");
        }
        assert!(p.iter().all(|&v| (0.0..1.0).contains(&v)));
        assert_eq!(p, sample_hypercube(1000, 2, 11));
        assert_ne!(p, sample_hypercube(1000, 2, 12));
    }

    #[test]
    fn injection_counts() {
        let d = pairwise_distances(&sample_hypercube(30, 2, 1), 2.0).unwrap();
        let (same, none) = inject_outliers(&d, 0, 5).unwrap();
        assert_eq!(same, d);
        assert!(none.is_empty());
        let (out, set) = inject_outliers(&d, 2, 5).unwrap();
        assert_eq!(set.len(), 2);
        let changed: Vec<_> = d.pairs().filter(|&(i, j)| out.get(i, j) != d.get(i, j)).collect();
        assert!(changed.iter().all(|p| set.contains(p)));
        assert_eq!(d.edge_count() - set.len(), 433);
        assert!(inject_outliers(&d, 436, 5).is_err());
        assert_eq!(inject_outliers(&d, 435, 5).unwrap().1.len(), 435);
    }

    #[test]
    fn lognormal_identity_and_positivity() {
        let d = pairwise_distances(&sample_hypercube(20, 2, 1), 2.0).unwrap();
        assert_eq!(lognormal_distort(&d, 0.0, Centering::Mean, 3).unwrap(), d);
        let out = lognormal_distort(&d, 1.0, Centering::Median, 3).unwrap();
        assert!(d.pairs().all(|(i, j)| out.get(i, j) > 0.0 && out.get(i, j) == out.get(j, i)));
        assert!(lognormal_distort(&d, -0.1, Centering::Median, 3).is_err());
    }

    #[test]
    fn plus_points_lie_on_bars() {
        let p = shape_points(ShapeKind::Plus, 200, 0.0, 9).unwrap();
        for i in 0..200 {
            let (x, y) = (p[(i, 0)], p[(i, 1)]);
            assert!((x == 0.0 && y.abs() <= 1.0) || (y == 0.0 && x.abs() <= 1.0));
        }
        assert!(shape_points(ShapeKind::Plus, 3, 0.0, 9).is_err());
    }

    #[test]
    fn spiral_radius_grows() {
        let thetas: Vec<f64> = (0..50).map(|k| k as f64 * 0.4).collect();
        assert!(thetas.windows(2).all(|w| spiral_radius(w[1]) > spiral_radius(w[0])));
        let p = shape_points(ShapeKind::Spiral, 100, 0.0, 2).unwrap();
        let max_r = spiral_radius(SPIRAL_TURNS * 2.0 * PI);
        assert!((0..100).all(|i| p.row(i).norm() <= max_r + 1e-12));
    }

    #[test]
    fn deform_single_edge() {
        let d = pairwise_distances(&sample_hypercube(10, 2, 1), 2.0).unwrap();
        assert_eq!(deform_edge(&d, 2, 5, 0.0).unwrap(), d);
        let out = deform_edge(&d, 2, 5, 2.0).unwrap();
        assert_eq!(out.get(5, 2), 4.0 * d.get(2, 5));
        assert!(deform_edge(&d, 3, 3, 1.0).is_err());
        assert!(deform_edge(&d, 3, 10, 1.0).is_err());
    }

    #[test]
    fn rate_to_count() {
        assert_eq!(outlier_count(70, 0.10), 241);
        assert_eq!(outlier_count(100, 0.05), 247);
        assert_eq!(outlier_count(30, 0.0), 0);
    }
}
