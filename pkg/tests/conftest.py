"""Shared test fixtures: scripted RNG stand-ins and brute-force oracles."""

from __future__ import annotations

import numpy as np
import pytest

from mobias.harness import RunTrace, derive_xp


class StubStream:
    """RngStream stand-in that hands out scripted draws.

    Feeding exact uniforms and normals pins down objective values so
    formula tests can assert equalities instead of distributions.
    """

    def __init__(self, uniforms=(), normals=(), ints=()):
        self._uniforms = [float(v) for v in uniforms]
        self._normals = [float(v) for v in normals]
        self._ints = [int(v) for v in ints]

    def _take(self, queue, size):
        if size is None:
            if not queue:
                raise AssertionError("stub stream exhausted")
            return queue.pop(0)
        n = int(np.prod(size)) if not np.isscalar(size) else int(size)
        if len(queue) < n:
            raise AssertionError("stub stream exhausted")
        out = np.array([queue.pop(0) for _ in range(n)])
        return out.reshape(size)

    def uniform(self, size=None):
        return self._take(self._uniforms, size)

    def normal(self, size=None):
        return self._take(self._normals, size)

    def integers(self, low, high, size=None):
        raw = self._take(self._ints, size)
        arr = np.asarray(raw, dtype=np.int64)
        if arr.size and (arr.min() < low or arr.max() >= high):
            raise AssertionError(f"scripted integer outside [{low}, {high})")
        return arr if size is not None else int(arr)

    def substream(self, *labels):
        raise AssertionError("stub stream has no substreams")


def brute_force_nondominated(objectives: np.ndarray) -> np.ndarray:
    """O(n^2) pairwise dominance check; the oracle for the fast filter."""
    objectives = np.asarray(objectives, dtype=float)
    n = objectives.shape[0]
    keep = np.ones(n, dtype=bool)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            a, b = objectives[j], objectives[i]
            if np.all(a <= b) and np.any(a < b):
                keep[i] = False
                break
    return keep


def make_trace(
    X: np.ndarray,
    F: np.ndarray,
    X_L: np.ndarray | None = None,
    problem: str = "f1",
    algorithm: str = "test",
    d: int | None = None,
    run_index: int = 0,
    pop: int | None = None,
    complete: bool = True,
) -> RunTrace:
    """Wrap raw arrays as a consistent RunTrace for detector tests."""
    X = np.asarray(X, dtype=float)
    F = np.asarray(F, dtype=float)
    if X_L is None:
        X_L = X[-(pop or 10) :]
    X_L = np.asarray(X_L, dtype=float)
    return RunTrace(
        problem=problem,
        algorithm=algorithm,
        d=d if d is not None else X.shape[1],
        run_index=run_index,
        seed=0,
        budget=X.shape[0],
        pop=pop if pop is not None else X_L.shape[0],
        X_P=derive_xp(X, F),
        X_L=X_L,
        archive_X=X,
        archive_F=F,
        complete=complete,
    )


@pytest.fixture
def stub_stream_cls():
    return StubStream


# One human-readable verdict per acceptance criterion, printed after the
# run so the gate's outcome is visible even when pytest captures stdout.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
