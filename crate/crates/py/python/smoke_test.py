"""Smoke test for the pytrimds extension.

Build with `cargo build -p trimds-py --release`, copy
target/release/libpytrimds.so to pytrimds.so somewhere on PYTHONPATH, then
run this script.
"""

import math

import pytrimds as t


def main():
    points = t.sample_hypercube(60, 2, 11)
    clean = t.pairwise_distances(points)
    assert clean.n == 60 and len(clean.tolist()) == 60
    assert clean.get(3, 3) == 0.0
    assert abs(clean.get(0, 1) - math.dist(points[0], points[1])) < 1e-12

    f = t.tmds_filter(clean)
    assert f.fallback and f.mask.removed_count() == 0

    observed, truth = t.inject_outliers(clean, 177, 3)
    f = t.tmds_filter(observed)
    report = t.detection_report(f.mask, truth)
    print(f"filter: phi {f.phi}, removed {f.mask.removed_count()}, "
          f"precision {report['precision']:.3f}, recall {report['recall']:.3f}")
    assert report["precision"] > 0.5
    assert sum(f.histogram) == 60 * 59 // 2

    sampled = t.tmds_filter(observed, mode="sampled", per_edge=58)
    assert sampled.counts == f.counts

    plain = t.smacof(observed, dim=2)
    robust = t.tmds_embed(observed, dim=2)
    s_plain = t.embedding_score(clean, plain.embedding)
    s_robust = t.embedding_score(clean, robust.embedding)
    print(f"score: smacof {s_plain:.4f}, tmds {s_robust:.4f}")
    assert s_robust < s_plain

    exact = t.smacof(clean)
    assert exact.final_stress < 1e-6, exact.final_stress
    assert t.embedding_score(clean, exact.embedding) < 1e-3

    sammon = t.sammon_embed(clean)
    assert sammon.embedding.n == 60 and sammon.embedding.dim == 2

    fg = t.fg12_embed(observed, 1e12)
    assert fg.nonzero_count == 0 and fg.outlier_pairs == []

    distorted = t.lognormal_distort(clean, 0.3, "median", 5)
    assert distorted.n == 60

    theory = t.break_probability_theory(2)
    estimate, halfwidth = t.break_probability_mc(10, 200_000, 1)
    print(f"theory: dim 2 {theory:.5f}, dim 10 mc {estimate:.5f} +- {halfwidth:.5f}")
    assert abs(theory - 0.24106) < 1e-4
    assert abs(estimate - t.break_probability_theory(10)) < 0.01

    try:
        t.DistanceMatrix([[0.0, 1.0], [2.0, 0.0]])
    except ValueError as e:
        print(f"rejected asymmetric input: {e}")
    else:
        raise AssertionError("asymmetric matrix accepted")

    print("ok")


if __name__ == "__main__":
    main()
