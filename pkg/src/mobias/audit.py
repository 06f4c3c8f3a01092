"""Audit harness for optimisers living outside this package.

The external optimiser runs as a child process speaking line-delimited
JSON on stdio. The harness owns the objective RNG and the archive, so
the child sees objective values only through the protocol and cannot
influence or replay the randomness.

Message flow (one JSON object per line):

    harness -> child   {"type": "init", "problem", "d", "budget", "pop"}
    child -> harness   {"type": "eval", "x": [..d floats..]}
    harness -> child   {"type": "objectives", "f": [g1, g2], "remaining": n}
    child -> harness   {"type": "final_population", "X": [[..], ..]}
    harness -> child   {"type": "done"}

Evaluation requests past the budget are refused with
{"type": "budget_exhausted", "remaining": 0}; a child that keeps
asking is cut off. Malformed messages abort the session with a
diagnostic. A child that exits before sending its final population
yields a trace marked incomplete. Only the child's stdout is protocol;
stderr passes through for debugging.
"""

from __future__ import annotations

import json
import logging
import os
import subprocess
from dataclasses import dataclass

import numpy as np

from .harness import (
    _PROBLEM_STREAM,
    Evaluator,
    RunTrace,
    derive_xp,
    run_seed,
    write_trace,
)
from .problems import get_problem
from .rng import RngStream

__all__ = ["AuditError", "AuditConfig", "run_audit"]

logger = logging.getLogger(__name__)


class AuditError(RuntimeError):
    """The audited child violated the protocol, or never evaluated."""


@dataclass(frozen=True)
class AuditConfig:
    """One audit session: which problem the child is evaluated on.

    ``algorithm`` is the label recorded in the trace; ``run_index``
    and ``master_seed`` feed the usual per-run seed derivation, so an
    audited run is reproducible like any built-in one.
    """

    problem: str
    d: int
    budget: int = 30_000
    pop: int = 100
    algorithm: str = "external"
    run_index: int = 0
    master_seed: int = 0
    max_refusals: int = 10

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        if self.pop < 1:
            raise ValueError("pop must be >= 1")
        if self.max_refusals < 1:
            raise ValueError("max_refusals must be >= 1")


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def _violation(child: subprocess.Popen, message: str) -> AuditError:
    child.kill()
    child.wait()
    return AuditError(f"protocol violation: {message}")


def _parse_vector(value, d: int) -> np.ndarray | None:
    """A length-d list of finite numbers, or None if it is not one."""
    if not isinstance(value, list) or len(value) != d:
        return None
    try:
        vec = np.array(value, dtype=float)
    except (TypeError, ValueError):
        return None
    if vec.shape != (d,) or not np.all(np.isfinite(vec)):
        return None
    return vec


def run_audit(
    command: list[str],
    config: AuditConfig,
    out_dir: str | os.PathLike | None = None,
) -> RunTrace:
    """Run one external optimiser to completion and record its trace.

    Returns the trace (written under ``out_dir`` when given). Raises
    AuditError on protocol violations or when the child exits without
    a single evaluation; a child that evaluates but dies early still
    yields a trace, marked incomplete.
    """
    spec = get_problem(config.problem, config.d)
    seed = run_seed(config.master_seed, config.problem, config.d, config.run_index)
    evaluator = Evaluator(spec, config.budget, RngStream(seed, _PROBLEM_STREAM))

    child = subprocess.Popen(
        command,
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        stderr=None,
        text=True,
        bufsize=1,
    )
    final_X: np.ndarray | None = None
    refusals = 0
    try:
        _send(
            child,
            {
                "type": "init",
                "problem": config.problem,
                "d": config.d,
                "budget": config.budget,
                "pop": config.pop,
            },
        )
        while True:
            line = child.stdout.readline()
            if line == "":
                break
            line = line.strip()
            if not line:
                continue
            try:
                message = json.loads(line)
            except json.JSONDecodeError as exc:
                raise _violation(child, f"undecodable message: {exc}")
            if not isinstance(message, dict) or "type" not in message:
                raise _violation(child, f"message without a type: {line[:200]}")
            kind = message["type"]
            if kind == "eval":
                x = _parse_vector(message.get("x"), config.d)
                if x is None:
                    raise _violation(
                        child,
                        f"eval.x must be {config.d} finite numbers: {line[:200]}",
                    )
                if evaluator.remaining == 0:
                    refusals += 1
                    _send(child, {"type": "budget_exhausted", "remaining": 0})
                    if refusals >= config.max_refusals:
                        raise _violation(
                            child,
                            f"child kept requesting evaluations after "
                            f"{refusals} budget_exhausted refusals",
                        )
                    continue
                f = evaluator(x[None, :])[0]
                _send(
                    child,
                    {
                        "type": "objectives",
                        "f": [float(f[0]), float(f[1])],
                        "remaining": evaluator.remaining,
                    },
                )
            elif kind == "final_population":
                rows = message.get("X")
                if not isinstance(rows, list) or not rows:
                    raise _violation(
                        child, "final_population.X must be a non-empty list"
                    )
                parsed = [_parse_vector(row, config.d) for row in rows]
                if any(v is None for v in parsed):
                    raise _violation(
                        child,
                        f"final_population rows must each be {config.d} "
                        f"finite numbers",
                    )
                final_X = np.vstack(parsed)
                archive_rows = {
                    tuple(row) for row in evaluator.archive()[0].tolist()
                }
                for row in final_X.tolist():
                    if tuple(row) not in archive_rows:
                        raise _violation(
                            child,
                            "final_population contains a vector that was "
                            "never evaluated",
                        )
                if evaluator.remaining == 0 and final_X.shape[0] != config.pop:
                    raise _violation(
                        child,
                        f"final_population has {final_X.shape[0]} rows, "
                        f"expected pop = {config.pop}",
                    )
                _send(child, {"type": "done"})
                break
            else:
                raise _violation(child, f"unknown message type {kind!r}")
        child.stdin.close()
        try:
            child.wait(timeout=30)
        except subprocess.TimeoutExpired:
            child.kill()
            child.wait()
    except BrokenPipeError:
        # child died mid-session; fall through to the partial trace
        child.wait()
    finally:
        if child.poll() is None:
            child.kill()
            child.wait()

    archive_X, archive_F = evaluator.archive()
    if archive_X.shape[0] == 0:
        raise AuditError("child exited without requesting a single evaluation")
    complete = final_X is not None and evaluator.remaining == 0
    if not complete:
        logger.warning(
            "audit of %s incomplete: %d of %d evaluations, final population %s",
            config.algorithm,
            evaluator.count,
            config.budget,
            "received" if final_X is not None else "missing",
        )
    trace = RunTrace(
        problem=config.problem,
        algorithm=config.algorithm,
        d=config.d,
        run_index=config.run_index,
        seed=seed,
        budget=config.budget,
        pop=config.pop,
        X_P=derive_xp(archive_X, archive_F),
        X_L=final_X if final_X is not None else np.empty((0, config.d)),
        archive_X=archive_X,
        archive_F=archive_F,
        complete=complete,
    )
    if out_dir is not None:
        write_trace(trace, out_dir)
    return trace


def _send(child: subprocess.Popen, message: dict) -> None:
    child.stdin.write(_dumps(message) + "\n")
    child.stdin.flush()
