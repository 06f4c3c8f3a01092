"""Position-blind bi-objective test problems.

Eleven problems whose objective values are random draws that ignore the
decision vector entirely. Because no decision vector is better than any
other, an unbiased optimiser leaves a uniform footprint over the search
space; any concentration it shows is structural bias. The noise scale r
controls the thickness of the objective cloud above a deterministic
lower envelope, which in turn controls the expected number of
non-dominated points.

Families
--------
F1  two independent U(0,1) objectives; the front is the single point (0, 0).
F2  sinusoidal envelope 1 - sin(12*pi*a^1.5)/4 - sqrt(a)/2, plus r*Z^2.
F3  nine-step staircase envelope, plus r*Z^2.
F4  piecewise-quadratic envelope (-2a^2, then -2(a-0.5)^2 - 0.5), plus r*Z^2.
F5  g2 = -g1 exactly; every sampled point is non-dominated.

Each batch consumes randomness in fixed blocks (the uniform block
first, then the normal block), so equal batch partitions on equal
streams give bit-identical results regardless of anything the caller
does between draws.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .pareto import nondominated_mask
from .rng import RngStream

__all__ = [
    "Family",
    "Variant",
    "ProblemSpec",
    "ObjectivePair",
    "PROBLEM_IDS",
    "R_VALUES",
    "get_problem",
    "problem_id",
    "evaluate",
    "evaluate_batch",
    "base_curve",
    "reference_front",
    "estimate_pf_count",
    "pearson_rho",
    "characterise",
]


class Family(Enum):
    F1 = "f1"
    F2 = "f2"
    F3 = "f3"
    F4 = "f4"
    F5 = "f5"


class Variant(Enum):
    ALPHA = "a"
    BETA = "b"
    GAMMA = "g"
    NONE = ""


# Noise scale per (family, variant). F1/F5 have no noise term.
R_VALUES: dict[tuple[Family, Variant], float] = {
    (Family.F2, Variant.ALPHA): 2.0,
    (Family.F2, Variant.BETA): 0.08,
    (Family.F2, Variant.GAMMA): 0.0015,
    (Family.F3, Variant.ALPHA): 20.0,
    (Family.F3, Variant.BETA): 0.9,
    (Family.F3, Variant.GAMMA): 0.02,
    (Family.F4, Variant.ALPHA): 60.0,
    (Family.F4, Variant.BETA): 2.0,
    (Family.F4, Variant.GAMMA): 0.06,
}


@dataclass(frozen=True)
class ProblemSpec:
    """One concrete test problem: family, variant, noise scale, dimension."""

    family: Family
    variant: Variant
    r: float
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if self.family in (Family.F1, Family.F5):
            if self.variant is not Variant.NONE:
                raise ValueError(f"{self.family.value} has no variants")
        else:
            expected = R_VALUES.get((self.family, self.variant))
            if expected is None:
                raise ValueError(
                    f"{self.family.value} requires a variant in {{a, b, g}}"
                )
            if self.r != expected:
                raise ValueError(
                    f"{self.family.value}{self.variant.value} requires r={expected}, "
                    f"got {self.r}"
                )
        if self.r < 0:
            raise ValueError("r must be nonnegative")


class ObjectivePair(NamedTuple):
    g1: float
    g2: float


# Canonical identifiers, in reporting order.
PROBLEM_IDS: tuple[str, ...] = (
    "f1",
    "f2a",
    "f2b",
    "f2g",
    "f3a",
    "f3b",
    "f3g",
    "f4a",
    "f4b",
    "f4g",
    "f5",
)

_FAMILY_BY_PREFIX = {f.value: f for f in Family}
_VARIANT_BY_SUFFIX = {v.value: v for v in Variant}


def get_problem(pid: str, d: int) -> ProblemSpec:
    """Build the ProblemSpec for a canonical identifier like "f3g"."""
    if pid not in PROBLEM_IDS:
        raise ValueError(f"unknown problem id {pid!r}; expected one of {PROBLEM_IDS}")
    family = _FAMILY_BY_PREFIX[pid[:2]]
    variant = _VARIANT_BY_SUFFIX[pid[2:]]
    r = R_VALUES.get((family, variant), 0.0)
    return ProblemSpec(family=family, variant=variant, r=r, d=d)


def problem_id(spec: ProblemSpec) -> str:
    """Canonical identifier of a spec ("f1", "f2a", ..., "f5")."""
    return spec.family.value + spec.variant.value


# Stair parameters for F3: thresholds p_i = i/10 and levels s_j = 1.1 - j/10.
_F3_P = np.arange(1, 10) / 10.0
_F3_S = 1.1 - np.arange(1, 11) / 10.0


def _base_f2(a: np.ndarray) -> np.ndarray:
    return 1.0 - np.sin(12.0 * np.pi * np.power(a, 1.5)) / 4.0 - np.sqrt(a) / 2.0


def _base_f3(a: np.ndarray) -> np.ndarray:
    # b counts thresholds strictly below a; comparisons kept explicit to
    # avoid float-edge surprises at a = i/10.
    b = (a[..., None] > _F3_P).sum(axis=-1)
    return 0.1 / (10.0 * (a - b / 10.0) + 1.0) ** 10 + _F3_S[b]


def _base_f4(a: np.ndarray) -> np.ndarray:
    # + 0.0 normalises the -0.0 produced at a = 0
    return np.where(a < 0.5, -2.0 * a * a, -2.0 * (a - 0.5) ** 2 - 0.5) + 0.0


def base_curve(spec: ProblemSpec, a) -> np.ndarray:
    """Deterministic lower envelope g2(a) with the noise term removed.

    Defined for F2/F3/F4/F5 (for F5 the envelope is the whole problem).
    F1 has no envelope curve: its front is the single point (0, 0).
    """
    a = np.asarray(a, dtype=float)
    if spec.family is Family.F2:
        return _base_f2(a)
    if spec.family is Family.F3:
        return _base_f3(a)
    if spec.family is Family.F4:
        return _base_f4(a)
    if spec.family is Family.F5:
        return -a + 0.0
    raise ValueError("f1 has no envelope curve; its front is the point (0, 0)")


def evaluate_batch(spec: ProblemSpec, n: int, rng: RngStream) -> np.ndarray:
    """Evaluate n points at once; returns an (n, 2) array of (g1, g2).

    Decision vectors are irrelevant to the objective values, so none are
    taken. Draw order per batch: the uniform block first, then (for
    F2/F3/F4) the normal block, or (for F1) the second uniform block.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    a = np.asarray(rng.uniform(n), dtype=float)
    if spec.family is Family.F1:
        g2 = np.asarray(rng.uniform(n), dtype=float)
    elif spec.family is Family.F5:
        g2 = -a
    else:
        z = np.asarray(rng.normal(n), dtype=float)
        g2 = base_curve(spec, a) + spec.r * z * z
    return np.column_stack([a, g2])


def evaluate(spec: ProblemSpec, x, rng: RngStream) -> ObjectivePair:
    """Evaluate one decision vector (a batch of one).

    The vector is validated for shape and finiteness but its values are
    ignored: identical RNG states give identical objectives for any x.
    Coordinates outside [0, 1] are accepted; bound handling is the
    optimiser's job.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.d,):
        raise ValueError(f"expected a vector of length {spec.d}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("decision vector has non-finite coordinates")
    g1, g2 = evaluate_batch(spec, 1, rng)[0]
    return ObjectivePair(float(g1), float(g2))


def reference_front(spec: ProblemSpec, n_points: int) -> list[ObjectivePair]:
    """Analytical noise-free envelope, sampled on a uniform grid.

    Used for plot overlays. F1 collapses to its single front point
    (0, 0) regardless of n_points.
    """
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if spec.family is Family.F1:
        return [ObjectivePair(0.0, 0.0)]
    grid = np.linspace(0.0, 1.0, n_points)
    g2 = base_curve(spec, grid)
    return [ObjectivePair(float(a), float(b)) for a, b in zip(grid, g2)]


def estimate_pf_count(spec: ProblemSpec, n: int, rng: RngStream) -> int:
    """Number of non-dominated points among n fresh evaluations."""
    if n < 1:
        raise ValueError("n must be >= 1")
    objectives = evaluate_batch(spec, n, rng)
    return int(nondominated_mask(objectives).sum())


def pearson_rho(spec: ProblemSpec, n: int, rng: RngStream) -> float:
    """Sample Pearson correlation of g1 vs g2 over n fresh evaluations.

    Computed with the direct moment formula so that the exact algebraic
    cases come out exact: for F5, g2 = -g1 gives precisely -1.0.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    objectives = evaluate_batch(spec, n, rng)
    dx = objectives[:, 0] - objectives[:, 0].mean()
    dy = objectives[:, 1] - objectives[:, 1].mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ValueError("correlation undefined: zero variance in an objective")
    return float((dx @ dy) / np.sqrt(sxx * syy))


def characterise(
    spec: ProblemSpec,
    rng: RngStream,
    n_pf: int = 10_000,
    n_rho: int = 100_000,
    reps: int = 10,
    scaling_ns: tuple[int, ...] = (1_000, 10_000, 100_000),
) -> dict:
    """Sample-based summary: |PF| mean+-sd, rho mean+-sd, scaling table.

    The scaling table reports the mean non-dominated proportion at each
    sample size, from which a log-log slope is fitted.
    """
    counts = np.array(
        [estimate_pf_count(spec, n_pf, rng.substream("pf", i)) for i in range(reps)],
        dtype=float,
    )
    rhos = np.array(
        [pearson_rho(spec, n_rho, rng.substream("rho", i)) for i in range(reps)]
    )
    proportions = []
    for n in scaling_ns:
        per_rep = [
            estimate_pf_count(spec, n, rng.substream("scale", n, i)) / n
            for i in range(reps)
        ]
        proportions.append(float(np.mean(per_rep)))
    slope, _ = np.polyfit(np.log10(scaling_ns), np.log10(proportions), 1)
    return {
        "problem": problem_id(spec),
        "pf_count_mean": float(counts.mean()),
        "pf_count_sd": float(counts.std(ddof=1)) if reps > 1 else 0.0,
        "rho_mean": float(rhos.mean()),
        "rho_sd": float(rhos.std(ddof=1)) if reps > 1 else 0.0,
        "scaling_ns": list(scaling_ns),
        "scaling_proportions": proportions,
        "scaling_slope": float(slope),
    }
