"""Reference optimisers and bound-constraint handling.

Five algorithms share one driver contract: ``initialise`` evaluates a
uniform population, then each ``step`` produces and evaluates exactly
``population_size`` new points. With the defaults (population 100,
300 iterations counting the initial one) a run consumes exactly
30,000 evaluations.

* random     - fresh uniform population every step; the unbiased null.
* nsga2      - binary tournament on (rank, crowding), SBX crossover,
               polynomial mutation, elitist environmental selection.
* moead      - Tchebycheff decomposition over a uniform weight grid
               with neighbourhood mating and replacement.
* toy-bound  - adds sigma = 0.5 Gaussian jumps and saturates; piles up
               mass on the bounds. Positive control for bound bias.
* toy-centre - contracts halfway towards the domain centre each step
               plus tiny noise. Positive control for centre bias.

Variation never confines itself: SBX and polynomial mutation use the
unbounded textbook formulas, and every boundary interaction flows
through the single pluggable bound handler, which is the mechanism
under study. Random draws are consumed in fixed per-generation blocks
regardless of gate outcomes, so traces are reproducible and the
consumption order is easy to state: tournament indices, crossover
gates, spread variables, mutation gates, mutation variables, then any
resampling the bound handler needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .pareto import crowding_distance, fast_nondominated_sort
from .rng import RngStream

__all__ = [
    "BoundHandling",
    "bound_handle",
    "OptimiserConfig",
    "Population",
    "Optimiser",
    "RandomSearch",
    "Nsga2",
    "Decomposition",
    "ToyBound",
    "ToyCentre",
    "ALGORITHM_IDS",
    "make_optimiser",
    "sbx",
    "polynomial_mutation",
    "tournament_winners",
    "environmental_selection",
    "tchebycheff",
]


class BoundHandling(Enum):
    SATURATE = "saturate"
    TOROIDAL = "toroidal"
    MIRROR = "mirror"
    RESAMPLE = "resample"


def bound_handle(x: np.ndarray, mode: BoundHandling, rng: RngStream | None = None):
    """Map out-of-bounds coordinates back into [0, 1]^d.

    In-bounds coordinates are never touched. Resample draws one fresh
    uniform per violating coordinate, in row-major order.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("coordinates must be finite")
    out = (x < 0.0) | (x > 1.0)
    if not out.any():
        return x.copy()
    result = x.copy()
    if mode is BoundHandling.SATURATE:
        result[out] = np.clip(x[out], 0.0, 1.0)
    elif mode is BoundHandling.TOROIDAL:
        result[out] = np.mod(x[out], 1.0)
    elif mode is BoundHandling.MIRROR:
        # reflect off both walls: triangle wave with period 2
        y = np.mod(x[out], 2.0)
        result[out] = np.where(y > 1.0, 2.0 - y, y)
    elif mode is BoundHandling.RESAMPLE:
        if rng is None:
            raise ValueError("resample bound handling needs an RNG stream")
        result[out] = rng.uniform(int(out.sum()))
    else:  # pragma: no cover - exhaustive enum
        raise ValueError(f"unknown bound handling {mode}")
    return result


@dataclass(frozen=True)
class OptimiserConfig:
    """Shared optimiser settings; defaults give the standard protocol."""

    population_size: int = 100
    iterations: int = 300
    bound_handling: BoundHandling = BoundHandling.SATURATE
    eta_c: float = 20.0
    eta_m: float = 20.0
    p_c: float = 1.0
    p_m: float | None = None  # None means 1/d
    neighbourhood: int = 20
    toy_sigma: float = 0.5
    toy_contraction: float = 0.5
    toy_noise: float = 0.005

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")

    @property
    def budget(self) -> int:
        return self.population_size * self.iterations

    def mutation_rate(self, d: int) -> float:
        return 1.0 / d if self.p_m is None else self.p_m


@dataclass
class Population:
    """Current decision vectors and their objective values."""

    X: np.ndarray  # (pop, d), all coordinates in [0, 1]
    F: np.ndarray  # (pop, 2)


# --------------------------------------------------------------------------
# Variation operators (pure functions of pre-drawn random blocks)
# --------------------------------------------------------------------------


def sbx(
    p1: np.ndarray,
    p2: np.ndarray,
    cross_gate: np.ndarray,
    coord_gate: np.ndarray,
    spread_u: np.ndarray,
    eta_c: float,
    p_c: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover on (m, d) parent blocks.

    A pair crosses over iff cross_gate < p_c; within a crossing pair a
    coordinate mixes iff coord_gate < 0.5, using the spread factor
    beta(u) = (2u)^(1/(eta+1)) for u <= 0.5, else (1/(2-2u))^(1/(eta+1)).
    u = 0.5 gives beta = 1: children equal parents.
    """
    beta = np.where(
        spread_u <= 0.5,
        (2.0 * spread_u) ** (1.0 / (eta_c + 1.0)),
        (1.0 / (2.0 * (1.0 - spread_u))) ** (1.0 / (eta_c + 1.0)),
    )
    active = (cross_gate[:, None] < p_c) & (coord_gate < 0.5)
    beta = np.where(active, beta, 1.0)
    c1 = 0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2)
    c2 = 0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2)
    return c1, c2


def polynomial_mutation(
    x: np.ndarray, gate: np.ndarray, u: np.ndarray, eta_m: float, p_m: float
) -> np.ndarray:
    """Polynomial mutation on an (m, d) block.

    A coordinate mutates iff gate < p_m, by
    delta(u) = (2u)^(1/(eta+1)) - 1 for u < 0.5,
    else 1 - (2-2u)^(1/(eta+1)); u = 0.5 leaves it unchanged.
    """
    exponent = 1.0 / (eta_m + 1.0)
    delta = np.where(
        u < 0.5,
        (2.0 * u) ** exponent - 1.0,
        1.0 - (2.0 * (1.0 - u)) ** exponent,
    )
    return np.where(gate < p_m, x + delta, x)


def tournament_winners(
    rank: np.ndarray, crowd: np.ndarray, pairs: np.ndarray
) -> np.ndarray:
    """Binary tournaments: lower rank wins, then larger crowding, then
    the first contestant."""
    i, j = pairs[:, 0], pairs[:, 1]
    j_wins = (rank[j] < rank[i]) | ((rank[j] == rank[i]) & (crowd[j] > crowd[i]))
    return np.where(j_wins, j, i)


def rank_and_crowd(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dominance rank and within-front crowding distance per row."""
    fronts = fast_nondominated_sort(F)
    rank = np.empty(F.shape[0], dtype=int)
    crowd = np.empty(F.shape[0], dtype=float)
    for level, front in enumerate(fronts):
        rank[front] = level
        crowd[front] = crowding_distance(F[front])
    return rank, crowd


def environmental_selection(F: np.ndarray, n_keep: int) -> np.ndarray:
    """Elitist truncation of an (n, 2) union to n_keep indices.

    Whole fronts are admitted while they fit; the splitting front is
    truncated by descending crowding distance (stable order on ties).
    Front order within a rank is preserved, so selection is
    deterministic.
    """
    fronts = fast_nondominated_sort(F)
    chosen: list[np.ndarray] = []
    count = 0
    for front in fronts:
        if count + front.size <= n_keep:
            chosen.append(front)
            count += front.size
            if count == n_keep:
                break
        else:
            crowd = crowding_distance(F[front])
            order = np.argsort(-crowd, kind="stable")
            chosen.append(front[order[: n_keep - count]])
            break
    return np.concatenate(chosen)


def tchebycheff(f: np.ndarray, w: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Weighted Tchebycheff aggregation max_i w_i * |f_i - z_i|.

    Broadcasts over leading dimensions of f and w.
    """
    return np.max(np.asarray(w) * np.abs(np.asarray(f) - np.asarray(z)), axis=-1)


# --------------------------------------------------------------------------
# Optimisers
# --------------------------------------------------------------------------


class Optimiser:
    """Base driver contract.

    ``evaluator`` is a callable (pop, d) -> (pop, 2) owned by the
    harness; it records every evaluation and enforces the budget.
    Subclasses draw randomness only from the stream handed to
    ``initialise``.
    """

    algorithm_id: str = ""

    def __init__(self, config: OptimiserConfig):
        self.config = config
        self.population: Population | None = None
        self._evaluator: Callable[[np.ndarray], np.ndarray] | None = None
        self._rng: RngStream | None = None
        self._d: int = 0

    def initialise(self, evaluator, d: int, rng: RngStream) -> Population:
        """Uniform initial population; counts population_size evaluations."""
        self._evaluator = evaluator
        self._rng = rng
        self._d = d
        X = rng.uniform((self.config.population_size, d))
        self.population = Population(X=X, F=evaluator(X))
        return self.population

    def step(self) -> Population:
        raise NotImplementedError

    def _handle_bounds(self, X: np.ndarray) -> np.ndarray:
        return bound_handle(X, self.config.bound_handling, self._rng)


class RandomSearch(Optimiser):
    """Fresh uniform sample every generation; the unbiased baseline."""

    algorithm_id = "random"

    def step(self) -> Population:
        X = self._rng.uniform((self.config.population_size, self._d))
        self.population = Population(X=X, F=self._evaluator(X))
        return self.population


class Nsga2(Optimiser):
    algorithm_id = "nsga2"

    def step(self) -> Population:
        cfg = self.config
        pop = cfg.population_size
        X, F = self.population.X, self.population.F
        rank, crowd = rank_and_crowd(F)

        n_pairs = (pop + 1) // 2
        pairs = self._rng.integers(0, pop, (2 * n_pairs, 2))
        parents = tournament_winners(rank, crowd, pairs)
        p1 = X[parents[0::2]]
        p2 = X[parents[1::2]]

        cross_gate = self._rng.uniform(n_pairs)
        coord_gate = self._rng.uniform((n_pairs, self._d))
        spread_u = self._rng.uniform((n_pairs, self._d))
        c1, c2 = sbx(p1, p2, cross_gate, coord_gate, spread_u, cfg.eta_c, cfg.p_c)
        children = np.concatenate([c1, c2])[:pop]

        mut_gate = self._rng.uniform((pop, self._d))
        mut_u = self._rng.uniform((pop, self._d))
        children = polynomial_mutation(
            children, mut_gate, mut_u, cfg.eta_m, cfg.mutation_rate(self._d)
        )
        children = self._handle_bounds(children)

        F_children = self._evaluator(children)
        union_X = np.concatenate([X, children])
        union_F = np.concatenate([F, F_children])
        keep = environmental_selection(union_F, pop)
        self.population = Population(X=union_X[keep], F=union_F[keep])
        return self.population


class Decomposition(Optimiser):
    """Tchebycheff decomposition over a uniform bi-objective weight grid.

    Each generation builds one child per subproblem with parents drawn
    from the subproblem's neighbourhood, evaluates the whole child
    batch, refreshes the ideal point from the batch, then applies
    neighbourhood replacement sequentially in subproblem order.
    """

    algorithm_id = "moead"

    def initialise(self, evaluator, d: int, rng: RngStream) -> Population:
        pop = self.config.population_size
        w1 = np.linspace(0.0, 1.0, pop)
        self.weights = np.column_stack([w1, 1.0 - w1])
        t = min(self.config.neighbourhood, pop)
        dist = np.abs(w1[:, None] - w1[None, :])
        self.neighbours = np.argsort(dist, axis=1, kind="stable")[:, :t]
        super().initialise(evaluator, d, rng)
        self.ideal = self.population.F.min(axis=0)
        return self.population

    def step(self) -> Population:
        cfg = self.config
        pop = cfg.population_size
        X, F = self.population.X, self.population.F
        t = self.neighbours.shape[1]

        picks = self._rng.integers(0, t, (pop, 2))
        p1 = X[self.neighbours[np.arange(pop), picks[:, 0]]]
        p2 = X[self.neighbours[np.arange(pop), picks[:, 1]]]

        cross_gate = self._rng.uniform(pop)
        coord_gate = self._rng.uniform((pop, self._d))
        spread_u = self._rng.uniform((pop, self._d))
        # one child per subproblem: keep the first SBX offspring
        child, _ = sbx(p1, p2, cross_gate, coord_gate, spread_u, cfg.eta_c, cfg.p_c)

        mut_gate = self._rng.uniform((pop, self._d))
        mut_u = self._rng.uniform((pop, self._d))
        child = polynomial_mutation(
            child, mut_gate, mut_u, cfg.eta_m, cfg.mutation_rate(self._d)
        )
        child = self._handle_bounds(child)

        F_child = self._evaluator(child)
        self.ideal = np.minimum(self.ideal, F_child.min(axis=0))

        for i in range(pop):
            hood = self.neighbours[i]
            incumbent = tchebycheff(F[hood], self.weights[hood], self.ideal)
            challenger = tchebycheff(F_child[i], self.weights[hood], self.ideal)
            better = challenger <= incumbent
            X[hood[better]] = child[i]
            F[hood[better]] = F_child[i]

        self.population = Population(X=X, F=F)
        return self.population


class ToyBound(Optimiser):
    """Positive control: large Gaussian jumps plus saturation.

    Always saturates regardless of the configured handler, because
    abusing saturation is its entire purpose.
    """

    algorithm_id = "toy-bound"

    def step(self) -> Population:
        cfg = self.config
        noise = self._rng.normal((cfg.population_size, self._d))
        X = np.clip(self.population.X + cfg.toy_sigma * noise, 0.0, 1.0)
        self.population = Population(X=X, F=self._evaluator(X))
        return self.population


class ToyCentre(Optimiser):
    """Positive control: geometric contraction towards the centre."""

    algorithm_id = "toy-centre"

    def step(self) -> Population:
        cfg = self.config
        noise = self._rng.normal((cfg.population_size, self._d))
        X = 0.5 + (self.population.X - 0.5) * cfg.toy_contraction
        X = np.clip(X + cfg.toy_noise * noise, 0.0, 1.0)
        self.population = Population(X=X, F=self._evaluator(X))
        return self.population


_OPTIMISERS: dict[str, type[Optimiser]] = {
    cls.algorithm_id: cls
    for cls in (RandomSearch, Nsga2, Decomposition, ToyBound, ToyCentre)
}

ALGORITHM_IDS: tuple[str, ...] = tuple(_OPTIMISERS)


def make_optimiser(algorithm_id: str, config: OptimiserConfig) -> Optimiser:
    """Instantiate a registered optimiser by its CLI-facing identifier."""
    if algorithm_id not in _OPTIMISERS:
        raise ValueError(
            f"unknown algorithm {algorithm_id!r}; expected one of {ALGORITHM_IDS}"
        )
    return _OPTIMISERS[algorithm_id](config)
