"""Experiment orchestration: seeded runs, archives, trace files.

A run executes one optimiser on one problem at one dimension for a
fixed evaluation budget, recording every evaluation in order. From the
archive it derives X_P (decision vectors whose objective pairs are
non-dominated over the whole run) and X_L (the final population).

Per-run seeds are stable hashes of (master_seed, problem, d,
run_index), so runs are independent and any subset can be reproduced
in any order or process. Within a run the optimiser and the problem
evaluations use separate derived streams.

Trace files are line-delimited JSON, one file per run, floats in
shortest round-trip form, so equal configurations give byte-identical
files.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .optimisers import Optimiser, OptimiserConfig, make_optimiser
from .pareto import nondominated_mask
from .problems import PROBLEM_IDS, ProblemSpec, evaluate_batch, get_problem
from .rng import RngStream, stable_hash64

__all__ = [
    "BudgetExceededError",
    "TraceError",
    "Evaluator",
    "RunTrace",
    "SuiteConfig",
    "run_seed",
    "run_single",
    "run_suite",
    "write_trace",
    "trace_filename",
    "load_trace",
    "load_traces",
    "sample_one_per_run",
]

logger = logging.getLogger(__name__)

_PROBLEM_STREAM = stable_hash64("problem-evaluations")
_OPTIMISER_STREAM = stable_hash64("optimiser-variation")


class BudgetExceededError(RuntimeError):
    """An optimiser asked for evaluations beyond its budget."""


class TraceError(ValueError):
    """A trace file is malformed or violates a trace invariant."""


class Evaluator:
    """Budget-enforcing evaluation recorder for one run.

    Callable on an (m, d) batch; returns the (m, 2) objective values
    and appends both to the archive. Refuses any batch that would
    exceed the budget.
    """

    def __init__(self, spec: ProblemSpec, budget: int, rng: RngStream):
        self.spec = spec
        self.budget = budget
        self.rng = rng
        self.count = 0
        self._X = np.empty((budget, spec.d))
        self._F = np.empty((budget, 2))

    @property
    def remaining(self) -> int:
        return self.budget - self.count

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.spec.d:
            raise ValueError(f"expected an (m, {self.spec.d}) batch, got {X.shape}")
        m = X.shape[0]
        if m > self.remaining:
            raise BudgetExceededError(
                f"batch of {m} exceeds remaining budget {self.remaining}"
            )
        F = evaluate_batch(self.spec, m, self.rng)
        self._X[self.count : self.count + m] = X
        self._F[self.count : self.count + m] = F
        self.count += m
        return F

    def archive(self) -> tuple[np.ndarray, np.ndarray]:
        return self._X[: self.count].copy(), self._F[: self.count].copy()


@dataclass
class RunTrace:
    """Everything recorded about one run.

    The archive arrays may be None when a suite was run in memory with
    ``keep_archives=False``; X_P and X_L are always present.
    """

    problem: str
    algorithm: str
    d: int
    run_index: int
    seed: int
    budget: int
    pop: int
    X_P: np.ndarray
    X_L: np.ndarray
    archive_X: np.ndarray | None = None
    archive_F: np.ndarray | None = None
    complete: bool = True


@dataclass(frozen=True)
class SuiteConfig:
    """What to run: problems x dimensions x repetitions."""

    problems: tuple[str, ...] = PROBLEM_IDS
    dims: tuple[int, ...] = (2, 10)
    n_r: int = 100
    optimiser: OptimiserConfig = field(default_factory=OptimiserConfig)
    master_seed: int = 0

    def __post_init__(self):
        if not self.problems:
            raise ValueError("problems must be non-empty")
        for pid in self.problems:
            if pid not in PROBLEM_IDS:
                raise ValueError(f"unknown problem id {pid!r}")
        if self.n_r < 1:
            raise ValueError("n_r must be >= 1")


def run_seed(master_seed: int, problem: str, d: int, run_index: int) -> int:
    """Per-run seed; independent of execution order by construction."""
    return stable_hash64(master_seed, problem, d, run_index)


def derive_xp(archive_X: np.ndarray, archive_F: np.ndarray) -> np.ndarray:
    """Decision vectors whose objectives are non-dominated over the run."""
    return archive_X[nondominated_mask(archive_F)].copy()


def run_single(
    problem: str,
    algorithm: str,
    d: int,
    run_index: int,
    config: OptimiserConfig,
    master_seed: int = 0,
    keep_archive: bool = True,
) -> RunTrace:
    """Execute one seeded run and derive its X_P and X_L."""
    spec = get_problem(problem, d)
    seed = run_seed(master_seed, problem, d, run_index)
    evaluator = Evaluator(spec, config.budget, RngStream(seed, _PROBLEM_STREAM))
    optimiser = make_optimiser(algorithm, config)
    optimiser.initialise(evaluator, d, RngStream(seed, _OPTIMISER_STREAM))
    for _ in range(config.iterations - 1):
        optimiser.step()
    if evaluator.count != config.budget:
        raise BudgetExceededError(
            f"run consumed {evaluator.count} of {config.budget} evaluations"
        )
    archive_X, archive_F = evaluator.archive()
    trace = RunTrace(
        problem=problem,
        algorithm=algorithm,
        d=d,
        run_index=run_index,
        seed=seed,
        budget=config.budget,
        pop=config.population_size,
        X_P=derive_xp(archive_X, archive_F),
        X_L=optimiser.population.X.copy(),
        archive_X=archive_X if keep_archive else None,
        archive_F=archive_F if keep_archive else None,
    )
    return trace


def _suite_cell(args) -> RunTrace:
    problem, algorithm, d, run_index, config, master_seed, out_dir, keep = args
    trace = run_single(problem, algorithm, d, run_index, config, master_seed)
    if out_dir is not None:
        write_trace(trace, out_dir)
    if not keep:
        trace = replace(trace, archive_X=None, archive_F=None)
    return trace


def run_suite(
    config: SuiteConfig,
    algorithm: str,
    out_dir: str | os.PathLike | None = None,
    workers: int = 1,
    keep_archives: bool = False,
) -> list[RunTrace]:
    """Run the whole suite; returns traces in (problem, dim, run) order.

    With ``out_dir`` set, one trace file is written per run and the
    returned traces drop their archives (reload them with
    ``load_traces``). Runs are seeded independently, so any worker
    count produces identical results.
    """
    jobs = [
        (
            problem,
            algorithm,
            d,
            k,
            config.optimiser,
            config.master_seed,
            out_dir,
            keep_archives,
        )
        for problem in config.problems
        for d in config.dims
        for k in range(config.n_r)
    ]
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(_suite_cell, jobs, chunksize=8))
    else:
        traces = [_suite_cell(job) for job in jobs]
    logger.info("suite complete: %d runs of %s", len(traces), algorithm)
    return traces


# --------------------------------------------------------------------------
# Trace serialisation
# --------------------------------------------------------------------------


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def trace_filename(trace: RunTrace) -> str:
    return f"{trace.problem}_d{trace.d}_run{trace.run_index}.jsonl"


def write_trace(trace: RunTrace, out_dir: str | os.PathLike) -> str:
    """Write one run as line-delimited JSON under out_dir/<algorithm>/."""
    if trace.archive_X is None or trace.archive_F is None:
        raise TraceError("cannot write a trace whose archive was dropped")
    algo_dir = os.path.join(os.fspath(out_dir), trace.algorithm)
    os.makedirs(algo_dir, exist_ok=True)
    path = os.path.join(algo_dir, trace_filename(trace))
    header = {
        "type": "header",
        "problem": trace.problem,
        "algorithm": trace.algorithm,
        "d": trace.d,
        "run": trace.run_index,
        "seed": trace.seed,
        "budget": trace.budget,
        "pop": trace.pop,
    }
    if not trace.complete:
        header["complete"] = False
    lines = [_dumps(header)]
    for i in range(trace.archive_X.shape[0]):
        lines.append(
            _dumps(
                {
                    "type": "eval",
                    "i": i,
                    "x": trace.archive_X[i].tolist(),
                    "f": trace.archive_F[i].tolist(),
                }
            )
        )
    lines.append(_dumps({"type": "final_population", "X": trace.X_L.tolist()}))
    lines.append(_dumps({"type": "xp", "X": trace.X_P.tolist()}))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def load_trace(path: str | os.PathLike) -> RunTrace:
    """Parse and validate one trace file.

    Raises TraceError with the offending line number on malformed
    records, and names the violated invariant on integrity failures.
    """
    records = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise TraceError(f"{path}: line {lineno}: invalid JSON: {exc}") from exc
    if not records or records[0].get("type") != "header":
        raise TraceError(f"{path}: first line must be a header record")
    header = records[0]
    try:
        problem = header["problem"]
        algorithm = header["algorithm"]
        d = int(header["d"])
        run_index = int(header["run"])
        seed = int(header["seed"])
        budget = int(header["budget"])
        pop = int(header["pop"])
    except KeyError as exc:
        raise TraceError(f"{path}: header missing field {exc}") from exc
    complete = bool(header.get("complete", True))

    evals = [r for r in records if r.get("type") == "eval"]
    finals = [r for r in records if r.get("type") == "final_population"]
    xps = [r for r in records if r.get("type") == "xp"]
    if len(finals) != 1 or len(xps) != 1:
        raise TraceError(
            f"{path}: expected exactly one final_population and one xp record"
        )

    try:
        archive_X = np.array([r["x"] for r in evals], dtype=float).reshape(
            len(evals), d
        )
        archive_F = np.array([r["f"] for r in evals], dtype=float).reshape(
            len(evals), 2
        )
    except (ValueError, KeyError) as exc:
        raise TraceError(f"{path}: malformed eval record: {exc}") from exc
    indices = [r["i"] for r in evals]
    if indices != list(range(len(evals))):
        raise TraceError(f"{path}: violated invariant: eval indices are 0..B-1 in order")
    if complete and len(evals) != budget:
        raise TraceError(
            f"{path}: violated invariant: |archive| = budget "
            f"({len(evals)} != {budget})"
        )
    X_L = np.array(finals[0]["X"], dtype=float).reshape(-1, d)
    X_P = np.array(xps[0]["X"], dtype=float).reshape(-1, d)
    if complete and X_L.shape[0] != pop:
        raise TraceError(
            f"{path}: violated invariant: |X_L| = population size "
            f"({X_L.shape[0]} != {pop})"
        )
    if X_P.shape[0] == 0:
        raise TraceError(f"{path}: violated invariant: X_P is non-empty")
    refiltered = derive_xp(archive_X, archive_F)
    if refiltered.shape != X_P.shape or not np.array_equal(refiltered, X_P):
        raise TraceError(
            f"{path}: violated invariant: X_P equals the re-filtered archive"
        )
    archive_rows = {tuple(row) for row in archive_X.tolist()}
    for name, block in (("X_P", X_P), ("X_L", X_L)):
        for row in block.tolist():
            if tuple(row) not in archive_rows:
                raise TraceError(
                    f"{path}: violated invariant: every {name} vector appears "
                    f"in the archive"
                )
    return RunTrace(
        problem=problem,
        algorithm=algorithm,
        d=d,
        run_index=run_index,
        seed=seed,
        budget=budget,
        pop=pop,
        X_P=X_P,
        X_L=X_L,
        archive_X=archive_X,
        archive_F=archive_F,
        complete=complete,
    )


def load_traces(path: str | os.PathLike) -> list[RunTrace]:
    """Load every trace file under a directory tree (recursively).

    Incomplete traces are loaded but flagged; callers decide whether to
    exclude them. Parse and integrity errors abort with the file named.
    """
    root = os.fspath(path)
    files = []
    for dirpath, _, filenames in os.walk(root):
        for name in sorted(filenames):
            if name.endswith(".jsonl"):
                files.append(os.path.join(dirpath, name))
    if not files:
        raise TraceError(f"no trace files found under {root}")
    traces = [load_trace(f) for f in sorted(files)]
    incomplete = sum(1 for t in traces if not t.complete)
    if incomplete:
        logger.warning("%d of %d traces are incomplete", incomplete, len(traces))
    return traces


def sample_one_per_run(
    traces: list[RunTrace], source: str, rng: RngStream
) -> np.ndarray:
    """One uniformly chosen member of each run's X_P or X_L, in run order."""
    if source not in ("X_P", "X_L"):
        raise ValueError(f"source must be 'X_P' or 'X_L', got {source!r}")
    rows = []
    for trace in sorted(traces, key=lambda t: t.run_index):
        block = trace.X_P if source == "X_P" else trace.X_L
        if block.shape[0] == 0:
            raise ValueError(f"run {trace.run_index} has an empty {source} set")
        rows.append(block[int(rng.integers(0, block.shape[0]))])
    return np.array(rows)
