"""Detectors: histograms, test battery, Clark-Evans, region taxonomy."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import make_trace
from mobias.detection import (
    AD_CRITICAL_VALUES,
    BinsizeQuad,
    DetectConfig,
    Region,
    anderson_darling_uniform,
    binsize_inspection,
    build_histogram,
    chi2_uniformity,
    clark_evans,
    classify_region,
    detect,
    expected_nn_distance,
    merge_pvalues,
    uniformity_battery,
)
from mobias.rng import RngStream

# frozen: independently computed at 40-digit precision
AD_ON_TENTHS = 1.4644741743512209  # sample (0.1, 0.2, 0.3, 0.4, 0.5)
CHI2_SF_4_8_DF3 = 0.18704174890490766  # regularised upper incomplete gamma
MERGED_TEN_HUNDREDTHS = 0.027182818284590452  # e * 0.01


# --------------------------------------------------------------------------
# Histograms
# --------------------------------------------------------------------------


def test_build_histogram_counts_and_closed_last_bin():
    hist = build_histogram(np.array([0.0, 0.02, 0.5, 0.97, 1.0]), K=20)
    assert hist.total == 5
    assert hist.counts[0] == 2  # 0.0 and 0.02
    assert hist.counts[10] == 1
    assert hist.counts[19] == 2  # 0.97 and the closed right edge 1.0
    assert hist.counts.sum() == 5


def test_binsizes_average_to_one():
    rng = RngStream(1, 0)
    hist = build_histogram(rng.uniform(1000), K=20)
    assert hist.binsizes.mean() == pytest.approx(1.0)
    assert hist.binsizes.shape == (20,)


def test_build_histogram_validation():
    with pytest.raises(ValueError):
        build_histogram(np.array([]))
    with pytest.raises(ValueError):
        build_histogram(np.array([0.5, 1.2]))
    with pytest.raises(ValueError):
        build_histogram(np.array([-0.1]))


def test_binsize_inspection_quad_positions():
    # engineered coordinates: heavy first and last bins, K = 4
    coords = np.concatenate(
        [np.full(4, 0.1), np.full(1, 0.3), np.full(1, 0.6), np.full(2, 0.9)]
    )
    hist, quad = binsize_inspection(coords.reshape(-1, 1), K=4)
    assert hist.counts.tolist() == [4, 1, 1, 2]
    assert quad.b_l == 2.0 and quad.c_l == 0.5 and quad.c_r == 0.5 and quad.b_r == 1.0
    assert quad.boundary_sum() == 3.0 and quad.centre_sum() == 1.0


def test_binsize_inspection_accepts_ragged_point_lists():
    blocks = [np.full((3, 2), 0.1), np.full((5, 2), 0.9)]
    hist, _ = binsize_inspection(blocks, K=4)
    assert hist.total == 16
    with pytest.raises(ValueError):
        binsize_inspection(np.array([[0.5]]), K=5)


# --------------------------------------------------------------------------
# Uniformity tests
# --------------------------------------------------------------------------


def test_anderson_darling_frozen_value():
    got = anderson_darling_uniform(np.array([0.5, 0.3, 0.1, 0.4, 0.2]))
    assert got == pytest.approx(AD_ON_TENTHS, rel=1e-12)
    with pytest.raises(ValueError):
        anderson_darling_uniform(np.array([0.5]))


def test_anderson_darling_handles_exact_bounds():
    value = anderson_darling_uniform(np.array([0.0, 0.25, 0.5, 0.75, 1.0]))
    assert np.isfinite(value)


def test_ad_critical_values_table():
    assert AD_CRITICAL_VALUES == {0.10: 1.933, 0.05: 2.492, 0.025: 3.070, 0.01: 3.857}


def test_battery_accepts_uniform_and_rejects_clusters():
    uniform = RngStream(2, 0).uniform((200, 2))
    assert uniformity_battery(uniform, alpha=0.01, reps=3) <= 0.25
    clustered = 0.5 + 0.01 * RngStream(2, 1).normal((200, 2))
    assert uniformity_battery(np.clip(clustered, 0, 1), alpha=0.01, reps=3) == 1.0


def test_battery_callable_input_and_detail_shape():
    draws = [RngStream(3, rep).uniform((50, 2)) for rep in range(4)]
    bias, detail = uniformity_battery(
        lambda rep: draws[rep], alpha=0.05, reps=4, return_detail=True
    )
    assert detail.shape == (4, 2, 4)  # reps x dims x tests
    assert bias == pytest.approx(detail.mean())
    same = uniformity_battery(lambda rep: draws[rep], alpha=0.05, reps=4)
    assert bias == same


def test_battery_validation():
    ok = RngStream(0, 0).uniform((30, 2))
    with pytest.raises(ValueError):
        uniformity_battery(ok, alpha=0.03)
    with pytest.raises(ValueError):
        uniformity_battery(ok[:10], alpha=0.01)
    with pytest.raises(ValueError):
        uniformity_battery(ok * 2.0, alpha=0.01)
    with pytest.raises(ValueError):
        uniformity_battery(ok, reps=0)


def test_chi2_uniformity_frozen_example():
    # 40 coordinates in 4 bins with counts (16, 8, 8, 8): statistic 4.8
    coords = np.concatenate(
        [np.full(16, 0.1), np.full(8, 0.3), np.full(8, 0.6), np.full(8, 0.9)]
    ).reshape(20, 2)
    assert chi2_uniformity(coords, K=4) == pytest.approx(CHI2_SF_4_8_DF3, rel=1e-12)


def test_chi2_uniformity_requires_five_expected_per_bin():
    points = RngStream(1, 1).uniform((20, 2))  # 40 coords < 5 * 20
    with pytest.raises(ValueError, match="larger sample or fewer bins"):
        chi2_uniformity(points, K=20)
    assert 0.0 <= chi2_uniformity(RngStream(1, 2).uniform((50, 2)), K=20) <= 1.0


def test_merge_pvalues_formula_and_cap():
    assert merge_pvalues([0.01] * 10) == pytest.approx(
        MERGED_TEN_HUNDREDTHS, rel=1e-12
    )
    assert merge_pvalues([1.0, 1.0]) == 1.0  # e * 1 capped at 1
    assert merge_pvalues([0.5]) == 1.0  # e * 0.5 > 1 also caps
    assert merge_pvalues([0.1]) == pytest.approx(np.e * 0.1, rel=1e-12)
    with pytest.raises(ValueError):
        merge_pvalues([])
    with pytest.raises(ValueError):
        merge_pvalues([0.0, 0.5])
    with pytest.raises(ValueError):
        merge_pvalues([0.5, 1.5])


def test_merged_pvalue_is_permutation_invariant():
    ps = [0.2, 0.8, 0.05, 0.6]
    assert merge_pvalues(ps) == pytest.approx(merge_pvalues(ps[::-1]), rel=1e-15)


# --------------------------------------------------------------------------
# Clark-Evans
# --------------------------------------------------------------------------


def test_expected_nn_distance_analytic_2d():
    # Gamma(1.5) * (m * pi)^(-1/2) collapses to 1 / (2 sqrt(m))
    assert expected_nn_distance(100, 2, method="analytic") == pytest.approx(0.05)
    assert expected_nn_distance(400, 2, method="analytic") == pytest.approx(0.025)


def test_expected_nn_distance_monte_carlo_is_cached_and_edge_aware():
    a = expected_nn_distance(100, 2, replicates=50)
    b = expected_nn_distance(100, 2, replicates=50)
    assert a == b  # cached, independent of caller RNG state
    # edge effects push the true expectation above the Poisson value
    assert a > expected_nn_distance(100, 2, method="analytic")
    with pytest.raises(ValueError):
        expected_nn_distance(1, 2)
    with pytest.raises(ValueError):
        expected_nn_distance(10, 2, method="bootstrap")


def test_clark_evans_uniform_clustered_regular():
    uniform = RngStream(5, 0).uniform((100, 2))
    assert clark_evans(uniform, replicates=200) == pytest.approx(1.0, abs=0.15)
    clustered = 0.5 + 0.01 * RngStream(5, 1).normal((100, 2))
    assert clark_evans(np.clip(clustered, 0, 1), replicates=200) < 0.5
    grid = np.stack(
        np.meshgrid(np.linspace(0.05, 0.95, 10), np.linspace(0.05, 0.95, 10)), -1
    ).reshape(100, 2)
    assert clark_evans(grid, replicates=200) > 1.2
    coincident = np.full((10, 2), 0.5)
    assert clark_evans(coincident, replicates=200) == 0.0
    with pytest.raises(ValueError):
        clark_evans(np.array([[0.5, 0.5]]))


# --------------------------------------------------------------------------
# Region taxonomy
# --------------------------------------------------------------------------


def test_classify_region_all_outcomes():
    assert classify_region(BinsizeQuad(1, 1, 1, 1)) is Region.UNBIASED
    assert classify_region(BinsizeQuad(2, 0.5, 0.5, 2)) is Region.E_BOUND
    assert classify_region(BinsizeQuad(0.5, 2, 2, 0.5)) is Region.A_CENTRE
    assert classify_region(BinsizeQuad(2, 2, 2, 2)) is Region.C_MIXED  # ratio 1
    assert classify_region(BinsizeQuad(1.3, 2, 2, 1.3)) is Region.B_MIXED  # 0.6/2
    assert classify_region(BinsizeQuad(2, 1.3, 1.3, 2)) is Region.D_MIXED  # 2/0.6
    assert classify_region(BinsizeQuad(0.2, 1, 1, 0.2)) is Region.IRREGULAR
    # depleted boundary with acceptable centre is still Irregular
    assert classify_region(BinsizeQuad(0.5, 1.1, 1.1, 0.5)) is Region.IRREGULAR


def test_classify_region_boundaries_are_inclusive():
    # exactly tau away from 2 still counts as Unbiased
    assert classify_region(BinsizeQuad(1.25, 1.25, 1.25, 1.25)) is Region.UNBIASED
    assert classify_region(BinsizeQuad(1.25, 0.75, 0.75, 1.25)) is Region.UNBIASED
    with pytest.raises(ValueError):
        classify_region(BinsizeQuad(1, 1, 1, 1), tau=0.0)


def test_classify_region_respects_tau():
    quad = BinsizeQuad(1.4, 1, 1, 1.4)  # boundary sum 2.8
    assert classify_region(quad, tau=0.5) is Region.E_BOUND
    assert classify_region(quad, tau=1.0) is Region.UNBIASED


# --------------------------------------------------------------------------
# Full detector
# --------------------------------------------------------------------------


def _uniform_traces(n_runs=60, pop=40, d=2, seed=0):
    traces = []
    for k in range(n_runs):
        rng = RngStream(seed, k + 1)
        X = rng.uniform((3 * pop, d))
        F = rng.uniform((3 * pop, 2))
        traces.append(make_trace(X, F, X_L=X[-pop:], run_index=k, pop=pop))
    return traces


def test_detect_null_cell_is_unbiased():
    traces = _uniform_traces()
    config = DetectConfig(reps=4, cei_replicates=100)
    report = detect(traces, source="X_L", config=config)
    assert report.n_runs == 60 and report.source == "X_L"
    assert report.bias_rej <= 0.25
    assert report.chi2_p_merged > 0.01
    assert report.region is Region.UNBIASED
    assert report.cei.mean == pytest.approx(1.0, abs=0.1)
    assert report.histogram.total == 60 * 40 * 2


def test_detect_is_deterministic():
    traces = _uniform_traces(n_runs=50)
    config = DetectConfig(reps=3, cei_replicates=100)
    a = detect(traces, source="X_L", config=config)
    b = detect(traces, source="X_L", config=config)
    assert a.bias_rej == b.bias_rej
    assert a.chi2_p_merged == b.chi2_p_merged
    assert a.quad == b.quad and a.region is b.region
    assert np.array_equal(a.cei.per_run, b.cei.per_run)
    assert np.array_equal(a.histogram.counts, b.histogram.counts)
    # a different sampling seed draws different repetition subsamples
    shifted = detect(
        traces,
        source="X_L",
        config=DetectConfig(reps=3, cei_replicates=100, sampling_seed=1),
    )
    assert shifted.chi2_p_merged != a.chi2_p_merged
    # the pooled histogram ignores sampling entirely
    assert np.array_equal(shifted.histogram.counts, a.histogram.counts)


def test_detect_flags_centre_clustering():
    traces = []
    for k in range(60):
        rng = RngStream(77, k)
        X = np.clip(0.5 + 0.02 * rng.normal((40, 2)), 0, 1)
        F = rng.uniform((40, 2))
        traces.append(make_trace(X, F, X_L=X, run_index=k, pop=40))
    report = detect(traces, source="X_L", config=DetectConfig(reps=3, cei_replicates=100))
    assert report.bias_rej == 1.0
    assert report.chi2_p_merged < 1e-20
    assert report.region is Region.A_CENTRE
    assert report.cei.mean < 0.5


def test_detect_cei_always_uses_final_population():
    # X_P uniform but X_L clustered: CEI must see the cluster
    traces = []
    for k in range(50):
        rng = RngStream(88, k)
        X = rng.uniform((80, 2))
        F = np.column_stack([rng.uniform(80), rng.uniform(80)])
        X_L = np.clip(0.5 + 0.01 * rng.normal((30, 2)), 0, 1)
        X = np.vstack([X, X_L])
        F = np.vstack([F, 2.0 + rng.uniform((30, 2))])  # dominated tail
        traces.append(make_trace(X, F, X_L=X_L, run_index=k, pop=30))
    report = detect(traces, source="X_P", config=DetectConfig(reps=3, cei_replicates=100))
    assert report.cei.mean < 0.5


def test_detect_validation():
    traces = _uniform_traces(n_runs=30)
    with pytest.raises(ValueError, match="no traces"):
        detect([])
    mixed = traces[:2] + [
        make_trace(traces[0].archive_X, traces[0].archive_F, problem="f5", run_index=9)
    ]
    with pytest.raises(ValueError, match="multiple cells"):
        detect(mixed)
    dupes = traces[:2] + [
        make_trace(traces[0].archive_X, traces[0].archive_F, run_index=1)
    ]
    with pytest.raises(ValueError, match="duplicate run indices"):
        detect(dupes)
    broken = traces[:2] + [
        make_trace(
            traces[2].archive_X, traces[2].archive_F, run_index=2, complete=False
        )
    ]
    with pytest.raises(ValueError, match="incomplete"):
        detect(broken)
    with pytest.raises(ValueError, match="source"):
        detect(traces, source="archive")


def test_chi2_underflow_is_floored():
    # a degenerate sample drives the survival function below the
    # representable range; the p-value must stay positive for merging
    points = np.full((500, 2), 0.01)
    p = chi2_uniformity(points)
    assert p == np.finfo(float).tiny
    assert 0.0 < merge_pvalues([p, p]) < 1e-300
