//! Constructed scenarios with known outliers.

use nalgebra::DMatrix;
use trimds::{
    count_broken_exact, deform_edge, detection_report, embedding_score, procrustes_align, procrustes_fit,
    pairwise_distances, sammon_embed, sample_hypercube, shape_points, shepard_data, smacof, smacof_embed, tmds_embed,
    tmds_filter, DistanceMatrix, Embedding, FilterMode, GroundTruthScenario, ScenarioSpec, ShapeKind, SolverConfig,
    WeightMatrix, DEFAULT_REL_TOL,
};

fn mean_offset(x: &Embedding, truth: &DMatrix<f64>) -> f64 {
    let aligned = procrustes_align(x, truth).unwrap();
    (0..truth.nrows()).map(|i| (aligned.coords().row(i) - truth.row(i)).norm()).sum::<f64>() / truth.nrows() as f64
}

#[test]
fn two_distorted_distances_are_repaired() {
    let p = sample_hypercube(30, 2, 4);
    let d = pairwise_distances(&p, 2.0).unwrap();
    let d = deform_edge(&d, 3, 17, 2.0).unwrap();
    let d = deform_edge(&d, 8, 21, -2.0).unwrap();
    let cfg = SolverConfig::default();
    let t = tmds_embed(&d, 2, FilterMode::Exact, DEFAULT_REL_TOL, &cfg).unwrap();
    assert!(!t.mask.keep(3, 17) && !t.mask.keep(8, 21));
    let s = smacof_embed(&d, 2, &cfg).unwrap();
    let (ot, os) = (mean_offset(t.embedding(), &p), mean_offset(&s.embedding, &p));
    assert!(ot <= 0.1 * os, "tmds {ot}, smacof {os}");
}

#[test]
fn single_distorted_edge_is_flagged() {
    for seed in 0..5 {
        let d = pairwise_distances(&sample_hypercube(30, 2, seed), 2.0).unwrap();
        let d = deform_edge(&d, 0, 1 + seed as usize, 2.0).unwrap();
        let f = tmds_filter(&d, FilterMode::Exact, DEFAULT_REL_TOL).unwrap();
        let flagged = f.diagnostics().flagged;
        assert!(flagged.iter().any(|e| (e.i, e.j) == (0, 1 + seed as usize)), "seed {seed}");
    }
}

#[test]
fn stronger_distortion_breaks_more_triangles() {
    for seed in 0..5 {
        let d = pairwise_distances(&sample_hypercube(40, 2, 10 + seed), 2.0).unwrap();
        let counts: Vec<u32> = [1.0, 1.5, 2.0, 3.0, 4.0, 6.0]
            .iter()
            .map(|&f: &f64| count_broken_exact(&deform_edge(&d, 2, 9, f.log2()).unwrap(), DEFAULT_REL_TOL).unwrap().count(2, 9))
            .collect();
        assert_eq!(counts[0], 0);
        assert!(counts.windows(2).all(|w| w[1] >= w[0]), "{counts:?}");
    }
}

#[test]
fn collinear_plus_shape_breaks_nothing() {
    let p = shape_points(ShapeKind::Plus, 60, 0.0, 3).unwrap();
    let d = pairwise_distances(&p, 2.0).unwrap();
    assert_eq!(count_broken_exact(&d, DEFAULT_REL_TOL).unwrap().max_count(), 0);
}

#[test]
fn filtering_at_ten_percent() {
    let mut precision = 0.0;
    for seed in 0..10 {
        let s = GroundTruthScenario::generate(ScenarioSpec::hypercube_with_rate(70, 2, 0.10, seed)).unwrap();
        let f = tmds_filter(&s.observed_d, FilterMode::Exact, DEFAULT_REL_TOL).unwrap();
        precision += detection_report(&f.mask, &s.outliers).unwrap().precision;
        assert!(f.mask.removed_count() <= s.observed_d.edge_count() / 2);
    }
    assert!(precision / 10.0 >= 0.7);
}

#[test]
fn tmds_beats_smacof_at_ten_percent() {
    let (mut t, mut m) = (0.0, 0.0);
    for seed in 0..5 {
        let s = GroundTruthScenario::generate(ScenarioSpec::hypercube_with_rate(100, 2, 0.10, seed)).unwrap();
        let cfg = SolverConfig::default();
        t += embedding_score(&s.true_d, tmds_embed(&s.observed_d, 2, FilterMode::Exact, DEFAULT_REL_TOL, &cfg).unwrap().embedding())
            .unwrap()
            .score;
        m += embedding_score(&s.true_d, &smacof_embed(&s.observed_d, 2, &cfg).unwrap().embedding).unwrap().score;
    }
    assert!(t < m, "tmds {t}, smacof {m}");
}

#[test]
fn flagged_shepard_rows_sit_off_the_diagonal() {
    let s = GroundTruthScenario::generate(ScenarioSpec::hypercube_with_rate(70, 2, 0.10, 5)).unwrap();
    let t = tmds_embed(&s.observed_d, 2, FilterMode::Exact, DEFAULT_REL_TOL, &SolverConfig::default()).unwrap();
    let rows = shepard_data(&s.observed_d, t.embedding(), &t.mask).unwrap();
    assert_eq!(rows.len(), 70 * 69 / 2);
    let far = |flag: bool| {
        let group: Vec<_> = rows.iter().filter(|r| r.flagged == flag).collect();
        group.iter().filter(|r| (r.embedded_distance / r.input_distance).ln().abs() > 1.5f64.ln()).count() as f64
            / group.len() as f64
    };
    assert!(far(true) > far(false), "{} vs {}", far(true), far(false));
}

fn outlier_scenario(factor: f64, seed: u64) -> (DistanceMatrix, DistanceMatrix) {
    let truth = pairwise_distances(&sample_hypercube(40, 2, seed), 2.0).unwrap();
    let mut d = truth.clone();
    for k in 0..20 {
        let (i, j) = (k, (k * 7 + 11) % 40);
        if i != j {
            d = deform_edge(&d, i, j, factor.log2()).unwrap();
        }
    }
    (truth, d)
}

#[test]
fn sammon_handles_enlarged_but_not_shortened_outliers() {
    let cfg = SolverConfig::default();
    let (mut sammon_long, mut smacof_long, mut sammon_short, mut tmds_short) = (0.0, 0.0, 0.0, 0.0);
    for seed in 0..5 {
        let (truth, long) = outlier_scenario(3.0, seed);
        sammon_long += embedding_score(&truth, &sammon_embed(&long, 2, &cfg).unwrap().embedding).unwrap().score;
        smacof_long += embedding_score(&truth, &smacof_embed(&long, 2, &cfg).unwrap().embedding).unwrap().score;
        let (truth, short) = outlier_scenario(0.2, seed);
        sammon_short += embedding_score(&truth, &sammon_embed(&short, 2, &cfg).unwrap().embedding).unwrap().score;
        tmds_short += embedding_score(&truth, tmds_embed(&short, 2, FilterMode::Exact, DEFAULT_REL_TOL, &cfg).unwrap().embedding())
            .unwrap()
            .score;
    }
    assert!(sammon_long < smacof_long, "sammon {sammon_long}, smacof {smacof_long}");
    assert!(sammon_short > tmds_short, "sammon {sammon_short}, tmds {tmds_short}");
}

#[test]
fn sammon_on_uniform_distances_is_smacof() {
    let d = DistanceMatrix::new(DMatrix::from_fn(6, 6, |i, j| if i == j { 0.0 } else { 1.0 })).unwrap();
    let cfg = SolverConfig::random(4);
    let a = sammon_embed(&d, 2, &cfg).unwrap().embedding;
    let b = smacof_embed(&d, 2, &cfg).unwrap().embedding;
    let (_, fit) = procrustes_fit(&a, b.coords()).unwrap();
    assert!(fit.residual < 1e-18);
}

#[test]
fn self_reconstruction() {
    let p = sample_hypercube(10, 2, 40);
    let d = pairwise_distances(&p, 2.0).unwrap();
    let r = smacof_embed(&d, 2, &SolverConfig::random(1)).unwrap();
    assert!(r.final_stress() < 1e-6);
    let aligned = procrustes_align(&r.embedding, &p).unwrap();
    let back = aligned.distances();
    assert!(d.pairs().all(|(i, j)| (back.get(i, j) - d.get(i, j)).abs() < 1e-3));
}

#[test]
fn zero_weight_pairs_have_no_influence() {
    let d = pairwise_distances(&sample_hypercube(12, 2, 41), 2.0).unwrap();
    let mut w = DMatrix::from_element(12, 12, 1.0);
    w[(2, 7)] = 0.0;
    w[(7, 2)] = 0.0;
    let w = WeightMatrix::new(w).unwrap();
    let mut garbage = d.as_matrix().clone();
    garbage[(2, 7)] = 123.0;
    garbage[(7, 2)] = 123.0;
    let garbage = DistanceMatrix::new(garbage).unwrap();
    let init = SolverConfig::given(Embedding::new(sample_hypercube(12, 2, 42)).unwrap());
    let clean = smacof(&d, &w, 2, &init).unwrap();
    let dirty = smacof(&garbage, &w, 2, &init).unwrap();
    assert_eq!(clean.embedding, dirty.embedding);
    assert_eq!(clean.stress_trace, dirty.stress_trace);
    assert!(clean.final_stress() < 1e-6);
}
