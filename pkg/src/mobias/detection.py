"""Structural-bias detectors and region classification.

Four complementary views of the same question — are the decision
vectors an optimiser visited uniformly distributed?

* uniformity_battery : per-dimension goodness-of-fit tests
  (Kolmogorov-Smirnov, Anderson-Darling, Cramer-von Mises,
  chi-squared with 10 bins) on one sampled point per run, repeated
  over several sampling draws. Reports the rejection fraction.
* chi2_uniformity    : one chi-squared test on all coordinates of the
  sampled points flattened together; per-repetition p-values are
  merged as e times their geometric mean (a valid merged p-value).
* binsize_inspection : K-bin relative-frequency histogram of every
  coordinate of every point across all runs, summarised by the two
  boundary bins and the two central bins.
* clark_evans        : observed over expected mean nearest-neighbour
  distance of each run's final population; < 1 indicates clustering.
  The expectation is Monte-Carlo calibrated by default, so uniform
  input gives 1 in any dimension; the edge-effect-free analytic
  formula is available as a fast alternative.

The boundary/centre binsize sums place each (algorithm, problem,
dimension) cell in a region taxonomy: Unbiased near (2, 2), E_Bound
for inflated boundary bins, A_Centre for inflated central bins, three
mixed regions when both are inflated, Irregular for depleted sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy import stats
from scipy.spatial import cKDTree

from .harness import RunTrace, sample_one_per_run
from .rng import RngStream, stable_hash64

__all__ = [
    "BinHistogram",
    "BinsizeQuad",
    "CeiResult",
    "Region",
    "DetectionReport",
    "DetectConfig",
    "anderson_darling_uniform",
    "AD_CRITICAL_VALUES",
    "uniformity_battery",
    "chi2_uniformity",
    "merge_pvalues",
    "build_histogram",
    "binsize_inspection",
    "clark_evans",
    "expected_nn_distance",
    "classify_region",
    "detect",
]


# --------------------------------------------------------------------------
# Histograms and binsizes
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BinHistogram:
    """K-bin count histogram over [0, 1] with relative binsizes.

    Bins are [(k-1)/K, k/K) with the final bin closed at 1. binsize_k
    is the observed count over the expected count under uniformity, so
    the binsizes always average to exactly 1.
    """

    K: int
    counts: np.ndarray
    total: int

    @property
    def binsizes(self) -> np.ndarray:
        return self.counts / (self.total / self.K)


@dataclass(frozen=True)
class BinsizeQuad:
    """The four tracked binsizes: boundary (left/right), centre (left/right)."""

    b_l: float
    c_l: float
    c_r: float
    b_r: float

    def boundary_sum(self) -> float:
        return self.b_l + self.b_r

    def centre_sum(self) -> float:
        return self.c_l + self.c_r


def build_histogram(coords: np.ndarray, K: int = 20) -> BinHistogram:
    """Histogram a flat coordinate vector into K equal bins over [0, 1]."""
    coords = np.asarray(coords, dtype=float).ravel()
    if coords.size == 0:
        raise ValueError("cannot histogram an empty coordinate vector")
    if np.any((coords < 0.0) | (coords > 1.0)):
        raise ValueError("coordinates must lie in [0, 1]")
    counts, _ = np.histogram(coords, bins=K, range=(0.0, 1.0))
    return BinHistogram(K=K, counts=counts.astype(int), total=int(coords.size))


def binsize_inspection(
    points: np.ndarray | Sequence[np.ndarray], K: int = 20
) -> tuple[BinHistogram, BinsizeQuad]:
    """Flatten all coordinates of all points and summarise the histogram.

    K must be even so the two central bins are well defined.
    """
    if K % 2 != 0:
        raise ValueError("K must be even so the central bins are defined")
    if isinstance(points, np.ndarray):
        coords = points.ravel()
    else:
        coords = np.concatenate([np.asarray(p).ravel() for p in points])
    hist = build_histogram(coords, K)
    sizes = hist.binsizes
    quad = BinsizeQuad(
        b_l=float(sizes[0]),
        c_l=float(sizes[K // 2 - 1]),
        c_r=float(sizes[K // 2]),
        b_r=float(sizes[K - 1]),
    )
    return hist, quad


# --------------------------------------------------------------------------
# Uniformity tests
# --------------------------------------------------------------------------

# Upper-tail critical values of the Anderson-Darling statistic against a
# fully specified continuous distribution (no estimated parameters).
AD_CRITICAL_VALUES: dict[float, float] = {
    0.10: 1.933,
    0.05: 2.492,
    0.025: 3.070,
    0.01: 3.857,
}


def anderson_darling_uniform(sample: np.ndarray) -> float:
    """A-squared statistic of a sample against U(0, 1)."""
    u = np.sort(np.asarray(sample, dtype=float))
    n = u.size
    if n < 2:
        raise ValueError("need at least 2 observations")
    # clip away exact 0/1 so the logs stay finite
    eps = np.finfo(float).tiny
    u = np.clip(u, eps, 1.0 - 1e-16)
    i = np.arange(1, n + 1)
    return float(-n - np.mean((2 * i - 1) * (np.log(u) + np.log1p(-u[::-1]))))


def _battery_tests(sample: np.ndarray, alpha: float) -> list[bool]:
    """Rejection flags of the four per-dimension tests, in fixed order."""
    ks_p = stats.kstest(sample, "uniform").pvalue
    ad_reject = anderson_darling_uniform(sample) > AD_CRITICAL_VALUES[alpha]
    cvm_p = stats.cramervonmises(sample, "uniform").pvalue
    counts, _ = np.histogram(sample, bins=10, range=(0.0, 1.0))
    expected = sample.size / 10.0
    chi2_stat = float(((counts - expected) ** 2 / expected).sum())
    chi2_p = float(stats.chi2.sf(chi2_stat, 9))
    return [ks_p < alpha, bool(ad_reject), cvm_p < alpha, chi2_p < alpha]


def uniformity_battery(
    points: np.ndarray | Callable[[int], np.ndarray],
    alpha: float = 0.01,
    reps: int = 10,
    return_detail: bool = False,
):
    """Fraction of per-dimension uniformity tests that reject.

    ``points`` is either one (n, d) matrix, reused for every
    repetition, or a callable mapping a repetition index to a fresh
    matrix (how ``detect`` feeds the per-repetition samplings). Each
    repetition runs the four tests on each of the d coordinate
    columns; the rejection fraction is averaged over repetitions.
    Anderson-Darling critical values exist for alpha in
    {0.10, 0.05, 0.025, 0.01}.
    """
    if alpha not in AD_CRITICAL_VALUES:
        raise ValueError(f"alpha must be one of {sorted(AD_CRITICAL_VALUES)}")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    getter = points if callable(points) else (lambda rep: points)
    detail = []
    for rep in range(reps):
        matrix = np.asarray(getter(rep), dtype=float)
        if matrix.ndim != 2:
            raise ValueError("expected an (n, d) point matrix")
        n, d = matrix.shape
        if n < 20:
            raise ValueError("tests are underpowered below 20 samples")
        if np.any((matrix < 0.0) | (matrix > 1.0)):
            raise ValueError("coordinates must lie in [0, 1]")
        detail.append(
            np.array([_battery_tests(matrix[:, j], alpha) for j in range(d)], dtype=bool)
        )
    bias_rej = float(np.mean([flags.mean() for flags in detail]))
    if return_detail:
        return bias_rej, np.stack(detail)
    return bias_rej


def chi2_uniformity(points: np.ndarray, K: int = 20) -> float:
    """Chi-squared uniformity p-value on all coordinates flattened.

    Requires n*d >= 5K so every bin expects at least 5 observations.
    The survival function underflows for extreme statistics; since a
    true p-value is never 0, the result is floored at the smallest
    positive normal float so downstream merging stays well defined.
    """
    matrix = np.asarray(points, dtype=float)
    if matrix.ndim != 2:
        raise ValueError("expected an (n, d) point matrix")
    coords = matrix.ravel()
    if coords.size < 5 * K:
        raise ValueError(
            f"need n*d >= {5 * K} coordinates for K={K} bins "
            f"(expected count >= 5 per bin); got {coords.size}. "
            f"Use a larger sample or fewer bins."
        )
    hist = build_histogram(coords, K)
    expected = coords.size / K
    statistic = float(((hist.counts - expected) ** 2 / expected).sum())
    return float(max(stats.chi2.sf(statistic, K - 1), np.finfo(float).tiny))


def merge_pvalues(ps: Sequence[float]) -> float:
    """Merge p-values as min(1, e * geometric mean)."""
    ps = np.asarray(ps, dtype=float)
    if ps.size == 0:
        raise ValueError("need at least one p-value")
    if np.any(ps <= 0.0) or np.any(ps > 1.0):
        raise ValueError("p-values must lie in (0, 1]")
    return float(min(1.0, math.e * math.exp(np.mean(np.log(ps)))))


# --------------------------------------------------------------------------
# Clark-Evans index
# --------------------------------------------------------------------------

_CALIBRATION_SEED = stable_hash64("clark-evans-calibration")
_NN_CACHE: dict[tuple[int, int, int], float] = {}


def _mean_nn_distance(points: np.ndarray) -> float:
    distances, _ = cKDTree(points).query(points, k=2)
    return float(distances[:, 1].mean())


def expected_nn_distance(
    m: int, d: int, method: str = "monte-carlo", replicates: int = 1000
) -> float:
    """Expected mean nearest-neighbour distance of m uniform points.

    monte-carlo: seeded average over replicate uniform samples in
    [0, 1]^d (cached per (m, d, replicates)); edge effects included,
    so it is the right yardstick for points in a box. analytic: the
    Poisson-process formula Gamma(1 + 1/d) * (m * V_d)^(-1/d), which
    ignores edge effects and underestimates in high dimension.
    """
    if m < 2:
        raise ValueError("need at least 2 points")
    if method == "analytic":
        v_d = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)
        return math.gamma(1.0 + 1.0 / d) * (m * v_d) ** (-1.0 / d)
    if method != "monte-carlo":
        raise ValueError(f"unknown calibration method {method!r}")
    key = (m, d, replicates)
    if key not in _NN_CACHE:
        rng = RngStream(_CALIBRATION_SEED, stable_hash64(m, d, replicates))
        total = 0.0
        for _ in range(replicates):
            total += _mean_nn_distance(rng.uniform((m, d)))
        _NN_CACHE[key] = total / replicates
    return _NN_CACHE[key]


def clark_evans(
    points: np.ndarray, method: str = "monte-carlo", replicates: int = 1000
) -> float:
    """Observed over expected mean nearest-neighbour distance.

    1 for uniform scatter, < 1 for clustering, > 1 for regular
    spacing. Coincident-only input gives 0.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 2:
        raise ValueError("need an (m, d) array with m >= 2")
    observed = _mean_nn_distance(points)
    expected = expected_nn_distance(points.shape[0], points.shape[1], method, replicates)
    return observed / expected


@dataclass(frozen=True)
class CeiResult:
    per_run: np.ndarray
    mean: float
    method: str
    replicates: int


# --------------------------------------------------------------------------
# Region taxonomy
# --------------------------------------------------------------------------


class Region(Enum):
    UNBIASED = "Unbiased"
    A_CENTRE = "A_Centre"
    B_MIXED = "B_Mixed"
    C_MIXED = "C_Mixed"
    D_MIXED = "D_Mixed"
    E_BOUND = "E_Bound"
    IRREGULAR = "Irregular"


_MIXED_LOW = math.tan(math.pi / 6.0)
_MIXED_HIGH = math.tan(math.pi / 3.0)


def classify_region(quad: BinsizeQuad, tau: float = 0.5) -> Region:
    """Place a binsize quad in the boundary/centre taxonomy.

    With x the boundary sum and y the centre sum (both 2 under perfect
    uniformity): Unbiased when both are within tau of 2; E_Bound when
    only x exceeds 2 + tau; A_Centre when only y does; when both
    exceed, the excess ratio (x-2)/(y-2) splits the quadrant into
    thirds B (centre-leaning), C (balanced), D (bound-leaning);
    anything left fell below 2 - tau somewhere: Irregular.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    x = quad.boundary_sum()
    y = quad.centre_sum()
    if abs(x - 2.0) <= tau and abs(y - 2.0) <= tau:
        return Region.UNBIASED
    if x > 2.0 + tau and y <= 2.0 + tau:
        return Region.E_BOUND
    if y > 2.0 + tau and x <= 2.0 + tau:
        return Region.A_CENTRE
    if x > 2.0 + tau and y > 2.0 + tau:
        ratio = (x - 2.0) / (y - 2.0)
        if ratio < _MIXED_LOW:
            return Region.B_MIXED
        if ratio > _MIXED_HIGH:
            return Region.D_MIXED
        return Region.C_MIXED
    return Region.IRREGULAR


# --------------------------------------------------------------------------
# The full detector
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DetectConfig:
    """Detector settings; defaults match the standard protocol."""

    alpha: float = 0.01
    reps: int = 10
    K: int = 20
    tau: float = 0.5
    cei_method: str = "monte-carlo"
    cei_replicates: int = 1000
    sampling_seed: int = 0


@dataclass(frozen=True)
class DetectionReport:
    """Per (algorithm, problem, dimension) detector outcomes."""

    algorithm: str
    problem: str
    d: int
    n_runs: int
    source: str
    bias_rej: float
    chi2_p_merged: float
    quad: BinsizeQuad
    cei: CeiResult
    region: Region
    histogram: BinHistogram


def detect(
    traces: list[RunTrace],
    source: str = "X_P",
    config: DetectConfig = DetectConfig(),
) -> DetectionReport:
    """Run all four detectors over one cell's complete trace set.

    ``source`` picks the point set (per-run non-dominated archive or
    final population) for the sampled tests, the binsize histogram and
    the region label; the Clark-Evans index always uses the final
    population. Sampling repetitions draw fresh one-per-run points
    with seeds derived from ``config.sampling_seed``, so reports are
    reproducible.
    """
    if not traces:
        raise ValueError("no traces given")
    cells = {(t.algorithm, t.problem, t.d) for t in traces}
    if len(cells) != 1:
        raise ValueError(f"traces span multiple cells: {sorted(cells)}")
    incomplete = sorted(t.run_index for t in traces if not t.complete)
    if incomplete:
        raise ValueError(f"incomplete runs excluded from detection: {incomplete}")
    run_indices = sorted(t.run_index for t in traces)
    if len(set(run_indices)) != len(traces):
        raise ValueError("duplicate run indices in trace set")
    algorithm, problem, d = next(iter(cells))

    samples = []
    for rep in range(config.reps):
        rng = RngStream(
            config.sampling_seed, stable_hash64("detect-sampling", problem, d, rep)
        )
        samples.append(sample_one_per_run(traces, source, rng))
    bias_rej = uniformity_battery(
        lambda rep: samples[rep], alpha=config.alpha, reps=config.reps
    )
    chi2_ps = [chi2_uniformity(s, K=config.K) for s in samples]
    merged_p = merge_pvalues(chi2_ps)

    pool = [t.X_P if source == "X_P" else t.X_L for t in traces]
    histogram, quad = binsize_inspection(pool, K=config.K)

    per_run_cei = np.array(
        [
            clark_evans(t.X_L, method=config.cei_method, replicates=config.cei_replicates)
            for t in traces
        ]
    )
    cei = CeiResult(
        per_run=per_run_cei,
        mean=float(per_run_cei.mean()),
        method=config.cei_method,
        replicates=config.cei_replicates,
    )

    return DetectionReport(
        algorithm=algorithm,
        problem=problem,
        d=d,
        n_runs=len(traces),
        source=source,
        bias_rej=bias_rej,
        chi2_p_merged=merged_p,
        quad=quad,
        cei=cei,
        region=classify_region(quad, tau=config.tau),
        histogram=histogram,
    )
