"""Bound handling, variation operators, and optimiser driver contracts."""

from __future__ import annotations

import numpy as np
import pytest

from mobias.harness import Evaluator
from mobias.optimisers import (
    ALGORITHM_IDS,
    BoundHandling,
    Nsga2,
    OptimiserConfig,
    bound_handle,
    environmental_selection,
    make_optimiser,
    polynomial_mutation,
    sbx,
    tchebycheff,
    tournament_winners,
)
from mobias.problems import get_problem
from mobias.rng import RngStream


def _run(algorithm: str, pop=10, iters=4, d=3, seed=0, **kwargs):
    config = OptimiserConfig(population_size=pop, iterations=iters, **kwargs)
    spec = get_problem("f2a", d)
    evaluator = Evaluator(spec, config.budget, RngStream(seed, 1))
    optimiser = make_optimiser(algorithm, config)
    optimiser.initialise(evaluator, d, RngStream(seed, 2))
    for _ in range(iters - 1):
        optimiser.step()
    return optimiser, evaluator


# --------------------------------------------------------------------------
# Bound handling
# --------------------------------------------------------------------------


def test_bound_handle_modes():
    x = np.array([-0.2, 1.3, 0.5])
    assert np.allclose(
        bound_handle(x, BoundHandling.SATURATE), [0.0, 1.0, 0.5]
    )
    assert np.allclose(
        bound_handle(x, BoundHandling.TOROIDAL), [0.8, 0.3, 0.5]
    )
    assert np.allclose(
        bound_handle(np.array([-0.3, 1.25]), BoundHandling.MIRROR), [0.3, 0.75]
    )
    # deep violations keep reflecting back inside
    assert np.allclose(
        bound_handle(np.array([2.3, -1.7]), BoundHandling.MIRROR), [0.3, 0.3]
    )


def test_bound_handle_never_touches_inbounds_coordinates():
    rng = np.random.default_rng(0)
    x = rng.random((50, 4)) * 3.0 - 1.0
    inside = (x >= 0.0) & (x <= 1.0)
    for mode in BoundHandling:
        out = bound_handle(x, mode, RngStream(0, 0))
        assert np.array_equal(out[inside], x[inside])
        assert np.all((out >= 0.0) & (out <= 1.0))


def test_bound_handle_resample_draws_one_uniform_per_violation():
    x = np.array([[1.5, 0.5], [-0.1, 2.0]])
    fixed = bound_handle(x, BoundHandling.RESAMPLE, RngStream(3, 0))
    expected = RngStream(3, 0).uniform(3)  # three violations, row-major
    assert np.allclose(fixed[~((x >= 0) & (x <= 1))], expected)
    with pytest.raises(ValueError):
        bound_handle(x, BoundHandling.RESAMPLE)
    with pytest.raises(ValueError):
        bound_handle(np.array([np.nan]), BoundHandling.SATURATE)


# --------------------------------------------------------------------------
# Variation operators
# --------------------------------------------------------------------------


def test_sbx_neutral_spread_returns_parents():
    p1 = np.array([[0.1, 0.2]])
    p2 = np.array([[0.7, 0.9]])
    ones = np.full((1, 2), 0.5)
    c1, c2 = sbx(p1, p2, np.zeros(1), np.zeros((1, 2)), ones, 20.0, 1.0)
    assert np.allclose(c1, p1) and np.allclose(c2, p2)


def test_sbx_children_preserve_pair_midpoint():
    rng = np.random.default_rng(1)
    p1, p2 = rng.random((2, 6, 4))
    c1, c2 = sbx(
        p1, p2, rng.random(6), rng.random((6, 4)), rng.random((6, 4)), 20.0, 1.0
    )
    assert np.allclose(c1 + c2, p1 + p2)


def test_sbx_gates_disable_mixing():
    p1 = np.zeros((3, 2))
    p2 = np.ones((3, 2))
    spread = np.full((3, 2), 0.9)
    # crossover gate at or above p_c: pair passes through
    c1, _ = sbx(p1, p2, np.array([0.6, 0.6, 0.6]), np.zeros((3, 2)), spread, 20.0, 0.5)
    assert np.array_equal(c1, p1)
    # coordinate gate at or above 0.5: coordinate passes through
    c1, _ = sbx(p1, p2, np.zeros(3), np.full((3, 2), 0.7), spread, 20.0, 1.0)
    assert np.array_equal(c1, p1)


def test_sbx_can_leave_the_unit_box():
    p1 = np.array([[0.05]])
    p2 = np.array([[0.95]])
    c1, c2 = sbx(
        p1, p2, np.zeros(1), np.zeros((1, 1)), np.array([[0.999]]), 2.0, 1.0
    )
    assert c1[0, 0] < 0.0 or c2[0, 0] > 1.0


def test_polynomial_mutation_delta_bounds_and_gate():
    x = np.full((1, 1000), 0.5)
    u = np.linspace(0.0, 0.999999, 1000)[None, :]
    out = polynomial_mutation(x, np.zeros_like(x), u, 20.0, 1.0)
    delta = out - x
    assert np.all(np.abs(delta) <= 1.0)
    assert delta[0, 0] == pytest.approx(-1.0)  # u = 0 jumps a full span down
    assert np.all(np.diff(delta[0]) >= 0)  # monotone in u
    gated = polynomial_mutation(x, np.ones_like(x), u, 20.0, 0.5)
    assert np.array_equal(gated, x)


def test_tournament_winner_rules():
    rank = np.array([0, 1, 0, 0])
    crowd = np.array([1.0, 9.0, 2.0, 1.0])
    pairs = np.array([[0, 1], [1, 0], [0, 2], [0, 3]])
    got = tournament_winners(rank, crowd, pairs)
    # lower rank beats higher crowding; ties go to higher crowding,
    # then to the first contestant
    assert got.tolist() == [0, 0, 2, 0]


def test_environmental_selection_is_elitist_and_deterministic():
    rng = np.random.default_rng(5)
    F = rng.random((40, 2))
    keep = environmental_selection(F, 15)
    assert keep.shape == (15,)
    assert len(set(keep.tolist())) == 15
    # nothing outside the selection dominates anything inside it
    from mobias.pareto import Dominance, dominates

    dropped = sorted(set(range(40)) - set(keep.tolist()))
    for i in dropped:
        for j in keep:
            assert dominates(F[i], F[j]) is not Dominance.FIRST_DOMINATES
    assert np.array_equal(environmental_selection(F, 15), keep)


def test_tchebycheff_values():
    f = np.array([[0.5, 0.2], [0.1, 0.9]])
    w = np.array([0.5, 0.5])
    z = np.array([0.0, 0.0])
    assert np.allclose(tchebycheff(f, w, z), [0.25, 0.45])
    assert tchebycheff(np.array([0.3, 0.3]), np.array([1.0, 0.0]), z) == 0.3


# --------------------------------------------------------------------------
# Driver contracts
# --------------------------------------------------------------------------


def test_config_validation_and_budget():
    assert OptimiserConfig().budget == 30_000
    assert OptimiserConfig(population_size=7, iterations=3).budget == 21
    assert OptimiserConfig().mutation_rate(10) == 0.1
    assert OptimiserConfig(p_m=0.3).mutation_rate(10) == 0.3
    with pytest.raises(ValueError):
        OptimiserConfig(population_size=1)
    with pytest.raises(ValueError):
        OptimiserConfig(iterations=0)
    with pytest.raises(ValueError):
        make_optimiser("annealing", OptimiserConfig())


@pytest.mark.parametrize("algorithm", ALGORITHM_IDS)
def test_exact_budget_and_feasible_population(algorithm):
    pop, iters = 10, 4
    optimiser, evaluator = _run(algorithm, pop=pop, iters=iters)
    assert evaluator.count == pop * iters
    assert optimiser.population.X.shape == (pop, 3)
    assert np.all((optimiser.population.X >= 0) & (optimiser.population.X <= 1))


@pytest.mark.parametrize("algorithm", ALGORITHM_IDS)
def test_runs_are_deterministic(algorithm):
    a, ev_a = _run(algorithm, seed=11)
    b, ev_b = _run(algorithm, seed=11)
    assert np.array_equal(a.population.X, b.population.X)
    assert np.array_equal(ev_a.archive()[0], ev_b.archive()[0])
    c, _ = _run(algorithm, seed=12)
    assert not np.array_equal(a.population.X, c.population.X)


def test_odd_population_still_meets_budget_exactly():
    optimiser, evaluator = _run("nsga2", pop=7, iters=5)
    assert evaluator.count == 35
    assert optimiser.population.X.shape[0] == 7


def test_nsga2_survivors_come_from_the_union():
    config = OptimiserConfig(population_size=8, iterations=2)
    spec = get_problem("f1", 2)
    evaluator = Evaluator(spec, config.budget, RngStream(4, 1))
    optimiser = Nsga2(config)
    optimiser.initialise(evaluator, 2, RngStream(4, 2))
    optimiser.step()
    archive_rows = {tuple(r) for r in evaluator.archive()[0].tolist()}
    for row in optimiser.population.X.tolist():
        assert tuple(row) in archive_rows


def test_moead_neighbourhoods_are_weight_local():
    config = OptimiserConfig(population_size=10, iterations=2, neighbourhood=3)
    spec = get_problem("f1", 2)
    evaluator = Evaluator(spec, config.budget, RngStream(4, 1))
    optimiser = make_optimiser("moead", config)
    optimiser.initialise(evaluator, 2, RngStream(4, 2))
    assert optimiser.neighbours.shape == (10, 3)
    assert np.array_equal(optimiser.neighbours[:, 0], np.arange(10))
    # subproblem 0's neighbours are the smallest weights
    assert set(optimiser.neighbours[0].tolist()) == {0, 1, 2}
    assert set(optimiser.neighbours[9].tolist()) == {9, 8, 7}


def test_moead_ideal_tracks_the_archive_minimum():
    config = OptimiserConfig(population_size=12, iterations=6, neighbourhood=4)
    spec = get_problem("f2b", 2)
    evaluator = Evaluator(spec, config.budget, RngStream(9, 1))
    optimiser = make_optimiser("moead", config)
    optimiser.initialise(evaluator, 2, RngStream(9, 2))
    previous = optimiser.ideal.copy()
    for _ in range(5):
        optimiser.step()
        assert np.all(optimiser.ideal <= previous)
        previous = optimiser.ideal.copy()
        # the ideal is the running component-wise minimum of every evaluation
        assert np.array_equal(optimiser.ideal, evaluator.archive()[1].min(axis=0))
        # survivors are evaluated points, never synthetic blends
        archive_rows = {tuple(r) for r in evaluator.archive()[0].tolist()}
        for row in optimiser.population.X.tolist():
            assert tuple(row) in archive_rows


def test_toy_bound_accumulates_boundary_mass():
    optimiser, _ = _run("toy-bound", pop=40, iters=10, d=2)
    X = optimiser.population.X
    on_edge = ((X == 0.0) | (X == 1.0)).mean()
    assert on_edge > 0.3


def test_toy_centre_contracts_to_the_middle():
    optimiser, _ = _run("toy-centre", pop=40, iters=10, d=2)
    X = optimiser.population.X
    assert np.all(np.abs(X - 0.5) < 0.1)


def test_algorithm_registry():
    assert ALGORITHM_IDS == ("random", "nsga2", "moead", "toy-bound", "toy-centre")
