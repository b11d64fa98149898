//! Robust multidimensional scaling.
//!
//! Outlier dissimilarities are found by counting, for every edge of the
//! complete graph, how many of its triangles violate the triangle inequality.
//! Edges in the high-count tail of that histogram are dropped and the rest
//! are embedded with weighted SMACOF. Baselines (plain, Sammon-weighted and
//! l0-penalized SMACOF), seeded synthetic scenarios, evaluation measures and
//! the distance-distribution theory behind the method live alongside.
//!
//! ```
//! use trimds::{pairwise_distances, sample_hypercube, inject_outliers};
//! use trimds::{tmds_embed, FilterMode, SolverConfig, DEFAULT_REL_TOL};
//!
//! let points = sample_hypercube(40, 2, 1);
//! let clean = pairwise_distances(&points, 2.0).unwrap();
//! let (observed, _truth) = inject_outliers(&clean, 20, 2).unwrap();
//! let fit = tmds_embed(&observed, 2, FilterMode::Exact, DEFAULT_REL_TOL, &SolverConfig::default()).unwrap();
//! assert_eq!(fit.embedding().n(), 40);
//! ```

pub mod error;
pub mod evaluation;
pub mod io;
pub mod metric;
pub mod robust;
pub mod seed;
pub mod smacof;
pub mod synthetic;
pub mod theory;
pub mod triangle;

pub use error::{Error, Result};
pub use evaluation::{detection_report, embedding_score, shepard_data, DetectionReport, EmbeddingScore, ShepardRow};
pub use metric::{
    pairwise_distances, procrustes_align, procrustes_fit, raw_stress, sammon_weights, DistanceMatrix, Embedding,
    FilterMask, WeightMatrix, DEFAULT_SAMMON_EPSILON,
};
pub use robust::{fg12_embed, sammon_embed, smacof_embed, tmds_embed, tmds_solve, Fg12Result, TmdsResult};
pub use smacof::{classical_init, smacof, Init, SmacofResult, SolverConfig};
pub use synthetic::{
    deform_edge, inject_outliers, Centering, lognormal_distort, sample_hypercube, shape_points, Distortion, GroundTruthScenario,
    ScenarioSpec, ShapeKind,
};
pub use theory::{break_probability_mc, break_probability_theory, distance_covariance_mc, normal_cdf, TheoryParams};
pub use triangle::{
    build_histogram, count_broken_exact, count_broken_sampled, filter_mask, is_broken, select_threshold, tmds_filter,
    BreakHistogram, FilterMode, FilterOutcome, Threshold, TriangleCounts, DEFAULT_REL_TOL,
};
