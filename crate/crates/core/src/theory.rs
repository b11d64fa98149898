//! Closed-form break probability for a triangle with one outlier edge, and
//! Monte-Carlo estimators for the distance statistics it rests on.
//!
//! For `p1, p2 ~ U([0,1]^d)` the distance `|p1 - p2|` is approximately
//! normal with mean `sqrt(d / 6)` and variance `7 / 120`, and two distances
//! sharing a vertex have covariance close to `0.008`. Treating the outlier
//! edge as an independent draw from the same law gives
//! `P(broken) = 2 Phi(-mu / (sqrt(2.73) sigma)) + Phi(-mu / (sqrt(3.27) sigma))`.
//!
//! Estimators run in fixed blocks of [`MC_BLOCK`] trials, each block drawing
//! from its own derived seed, and merge block results in block order. The
//! answer is the same however many threads evaluate the blocks.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seed::{derive_seed, rng};
use crate::triangle::DEFAULT_REL_TOL;

pub const DISTANCE_VARIANCE: f64 = 7.0 / 120.0;
pub const SHARED_VERTEX_COVARIANCE: f64 = 0.008;
/// `1.73 sigma^2 + sigma^2`: variance of `D12 - D23 - D13`.
pub const DIFFERENCE_VARIANCE_FACTOR: f64 = 2.73;
/// `2.27 sigma^2 + sigma^2`: variance of `D12 + D23 - D13`.
pub const SUM_VARIANCE_FACTOR: f64 = 3.27;

pub const MC_BLOCK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub dim: usize,
    pub mu: f64,
    pub sigma2: f64,
    pub cov: f64,
}

impl TheoryParams {
    pub fn new(dim: usize) -> Self {
        Self { dim, mu: (dim as f64 / 6.0).sqrt(), sigma2: DISTANCE_VARIANCE, cov: SHARED_VERTEX_COVARIANCE }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn break_probability_theory(dim: usize) -> f64 {
    let p = TheoryParams::new(dim);
    let s = p.sigma();
    2.0 * normal_cdf(-p.mu / (DIFFERENCE_VARIANCE_FACTOR.sqrt() * s)) + normal_cdf(-p.mu / (SUM_VARIANCE_FACTOR.sqrt() * s))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// Normal-approximation 95% binomial halfwidth.
    pub halfwidth: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutlierEdge {
    /// `D(p1, p3)` is replaced by the distance between two fresh points.
    Replaced,
    /// All three sides are the true distances.
    Kept,
}

fn uniform_point(r: &mut ChaCha8Rng, out: &mut [f64]) {
    for v in out.iter_mut() {
        *v = r.random::<f64>();
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn blocks(trials: usize) -> impl IndexedParallelIterator<Item = (u64, usize)> {
    let count = trials.div_ceil(MC_BLOCK);
    (0..count).into_par_iter().map(move |b| (b as u64, MC_BLOCK.min(trials - b * MC_BLOCK)))
}

/// Fraction of broken triangles on uniform triples.
pub fn break_fraction_mc(dim: usize, trials: usize, seed: u64, edge: OutlierEdge) -> McEstimate {
    assert!(dim >= 1 && trials >= 1, "dim and trials must be positive");
    let per_block: Vec<usize> = blocks(trials)
        .map(|(b, len)| {
            let mut r = rng(derive_seed(seed, "break-mc", b));
            let [mut p1, mut p2, mut p3, mut q1, mut q2] = std::array::from_fn(|_| vec![0.0; dim]);
            let mut hits = 0;
            for _ in 0..len {
                uniform_point(&mut r, &mut p1);
                uniform_point(&mut r, &mut p2);
                uniform_point(&mut r, &mut p3);
                let d12 = dist(&p1, &p2);
                let d23 = dist(&p2, &p3);
                let d13 = match edge {
                    OutlierEdge::Kept => dist(&p1, &p3),
                    OutlierEdge::Replaced => {
                        uniform_point(&mut r, &mut q1);
                        uniform_point(&mut r, &mut q2);
                        dist(&q1, &q2)
                    }
                };
                if crate::triangle::is_broken(d12, d23, d13, DEFAULT_REL_TOL).unwrap_or(false) {
                    hits += 1;
                }
            }
            hits
        })
        .collect();
    let hits: usize = per_block.into_iter().sum();
    let p = hits as f64 / trials as f64;
    McEstimate { estimate: p, halfwidth: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(), trials }
}

/// Monte-Carlo check of the closed form: the outlier edge is an independent
/// distance.
pub fn break_probability_mc(dim: usize, trials: usize, seed: u64) -> McEstimate {
    break_fraction_mc(dim, trials, seed, OutlierEdge::Replaced)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// `D(p1, p2)` against `D(p2, p3)`.
    SharedVertex,
    /// `D(p1, p2)` against `D(p3, p4)`.
    Independent,
}

#[derive(Default, Clone, Copy)]
struct Moments {
    n: f64,
    sa: f64,
    sb: f64,
    saa: f64,
    sab: f64,
}

impl Moments {
    fn merge(self, o: Self) -> Self {
        Self { n: self.n + o.n, sa: self.sa + o.sa, sb: self.sb + o.sb, saa: self.saa + o.saa, sab: self.sab + o.sab }
    }
}

fn pair_moments(dim: usize, trials: usize, seed: u64, pairing: Pairing) -> Moments {
    assert!(dim >= 1 && trials >= 1, "dim and trials must be positive");
    let per_block: Vec<Moments> = blocks(trials)
        .map(|(b, len)| {
            let mut r = rng(derive_seed(seed, "distance-mc", b));
            let [mut p1, mut p2, mut p3, mut p4] = std::array::from_fn(|_| vec![0.0; dim]);
            let mut m = Moments::default();
            for _ in 0..len {
                uniform_point(&mut r, &mut p1);
                uniform_point(&mut r, &mut p2);
                uniform_point(&mut r, &mut p3);
                let a = dist(&p1, &p2);
                let b = match pairing {
                    Pairing::SharedVertex => dist(&p2, &p3),
                    Pairing::Independent => {
                        uniform_point(&mut r, &mut p4);
                        dist(&p3, &p4)
                    }
                };
                m.n += 1.0;
                m.sa += a;
                m.sb += b;
                m.saa += a * a;
                m.sab += a * b;
            }
            m
        })
        .collect();
    per_block.into_iter().fold(Moments::default(), Moments::merge)
}

/// Sample covariance of two distances on uniform hypercube points.
pub fn distance_covariance_mc(dim: usize, trials: usize, seed: u64, pairing: Pairing) -> f64 {
    let m = pair_moments(dim, trials, seed, pairing);
    (m.sab - m.sa * m.sb / m.n) / (m.n - 1.0).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceMoments {
    pub mean: f64,
    pub variance: f64,
    pub trials: usize,
}

/// Mean and sample variance of `|p1 - p2|` over independent uniform pairs.
pub fn distance_moments_mc(dim: usize, trials: usize, seed: u64) -> DistanceMoments {
    let m = pair_moments(dim, trials, seed, Pairing::Independent);
    let mean = m.sa / m.n;
    let variance = (m.saa - m.sa * mean) / (m.n - 1.0).max(1.0);
    DistanceMoments { mean, variance, trials }
}
