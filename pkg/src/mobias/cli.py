"""Command-line interface.

Subcommands: ``problems`` (sample and characterise the test problems),
``run`` (execute a built-in optimiser suite), ``detect`` (score trace
directories), ``report`` (re-render tables from a report CSV), and
``audit`` (drive an external optimiser over the stdio protocol).

Option values resolve as: command-line flag, then config file, then
the MOBIAS_OUT environment variable (output directory only), then the
built-in default. The config file is plain ``key = value`` lines with
``#`` comments; keys are long option names with underscores.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .audit import AuditConfig, AuditError, run_audit
from .detection import (
    AD_CRITICAL_VALUES,
    DetectConfig,
    Region,
    detect,
)
from .harness import SuiteConfig, TraceError, load_traces, run_suite, trace_filename
from .optimisers import ALGORITHM_IDS, BoundHandling, OptimiserConfig
from .problems import PROBLEM_IDS, characterise, evaluate_batch, get_problem
from .reporting import (
    render_front_scatter,
    render_region_scatter,
    render_table,
    write_report_files,
)
from .rng import RngStream

__all__ = ["main"]

logger = logging.getLogger(__name__)

_OUT_ENV = "MOBIAS_OUT"
_DEFAULT_OUT = "mobias-out"


def parse_config(path: str) -> dict[str, str]:
    """Read ``key = value`` lines; '#' starts a comment; quotes optional."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise ValueError(f"{path}: line {lineno}: expected key = value")
            value = value.strip()
            if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
                value = value[1:-1]
            values[key.strip().replace("-", "_")] = value
    return values


class _Options:
    """Flag > config > environment > default resolution for one command."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = parse_config(args.config) if args.config else {}

    def get(self, key: str, default, convert=str):
        value = getattr(self.args, key, None)
        if value is not None:
            return value
        if key in self.config:
            return convert(self.config[key])
        return default

    def out_dir(self) -> str:
        return self.get("out", os.environ.get(_OUT_ENV, _DEFAULT_OUT))


def _csv_items(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _dims(text: str) -> tuple[int, ...]:
    return tuple(int(item) for item in _csv_items(text))


def _fmt(value: float) -> str:
    return repr(float(value))


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_problems(args: argparse.Namespace) -> int:
    opts = _Options(args)
    seed = opts.get("seed", 0, int)
    d = opts.get("d", 2, int)
    spec = get_problem(args.problem, d)
    rng = RngStream(seed, 0)
    if args.characterise:
        n = opts.get("n", 10_000, int)
        summary = characterise(spec, rng.substream("characterise"), n_pf=n, n_rho=n)
        for key in ("problem", "pf_count_mean", "pf_count_sd", "rho_mean", "rho_sd"):
            value = summary[key]
            print(f"{key},{value if isinstance(value, str) else _fmt(value)}")
        print("n,proportion")
        for n_i, prop in zip(summary["scaling_ns"], summary["scaling_proportions"]):
            print(f"{n_i},{_fmt(prop)}")
        print(f"scaling_slope,{_fmt(summary['scaling_slope'])}")
    else:
        n = opts.get("n", 1000, int)
        objectives = evaluate_batch(spec, n, rng.substream("sample"))
        print("g1,g2")
        for g1, g2 in objectives.tolist():
            print(f"{_fmt(g1)},{_fmt(g2)}")
    if args.front_svg:
        n = opts.get("n", 1000, int)
        objectives = evaluate_batch(spec, n, rng.substream("front"))
        svg = render_front_scatter(spec, objectives, title=f"{args.problem} sample")
        with open(args.front_svg, "w", encoding="utf-8") as fh:
            fh.write(svg)
        logger.info("wrote %s", args.front_svg)
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    opts = _Options(args)
    problems = tuple(opts.get("problems", list(PROBLEM_IDS), _csv_items))
    dims = tuple(opts.get("dims", (2, 10), _dims))
    optimiser = OptimiserConfig(
        population_size=opts.get("pop", 100, int),
        iterations=opts.get("iters", 300, int),
        bound_handling=BoundHandling(opts.get("bound", "saturate")),
    )
    config = SuiteConfig(
        problems=problems,
        dims=dims,
        n_r=opts.get("runs", 100, int),
        optimiser=optimiser,
        master_seed=opts.get("seed", 0, int),
    )
    out = opts.out_dir()
    workers = opts.get("workers", 1, int)
    traces = run_suite(config, args.algorithm, out_dir=out, workers=workers)
    print(f"wrote {len(traces)} traces under {os.path.join(out, args.algorithm)}")
    return 0


def cmd_detect(args: argparse.Namespace) -> int:
    opts = _Options(args)
    traces = load_traces(args.trace_dir)
    usable = [t for t in traces if t.complete]
    for t in traces:
        if not t.complete:
            logger.warning("skipping incomplete trace %s", trace_filename(t))
    if not usable:
        raise TraceError("all traces are incomplete; nothing to detect on")
    config = DetectConfig(
        alpha=opts.get("alpha", 0.01, float),
        reps=opts.get("reps", 10, int),
        K=opts.get("bins", 20, int),
        tau=opts.get("tau", 0.5, float),
        cei_method=opts.get("cei_method", "monte-carlo"),
        cei_replicates=opts.get("cei_replicates", 1000, int),
        sampling_seed=opts.get("sampling_seed", 0, int),
    )
    source = opts.get("source", "X_P")
    cells: dict[tuple[str, str, int], list] = {}
    for trace in usable:
        cells.setdefault((trace.algorithm, trace.problem, trace.d), []).append(trace)
    reports = [
        detect(cell_traces, source=source, config=config)
        for _, cell_traces in sorted(cells.items())
    ]
    out = opts.out_dir()
    write_report_files(reports, out, tau=config.tau)
    sys.stdout.write(render_table(reports, "csv"))
    logger.info("wrote report files under %s", out)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    opts = _Options(args)
    reports = _reports_from_csv(args.report_csv)
    out = opts.out_dir()
    os.makedirs(out, exist_ok=True)
    for fmt, name in (("markdown", "report.md"), ("html", "report.html")):
        path = os.path.join(out, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(render_table(reports, fmt))
    tau = opts.get("tau", 0.5, float)
    with open(os.path.join(out, "regions.svg"), "w", encoding="utf-8") as fh:
        fh.write(render_region_scatter(reports, tau=tau))
    print(f"re-rendered {len(reports)} rows under {out}")
    return 0


def _reports_from_csv(path: str):
    """Rebuild the table-rendering subset of each report row."""
    from .detection import BinsizeQuad, CeiResult, DetectionReport

    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.strip() for line in fh if line.strip()]
    if not lines:
        raise ValueError(f"{path}: empty report")
    header = lines[0].split(",")
    expected = [
        "algorithm", "problem", "d", "BIAS_rej", "chi2_p", "binsize_B_L",
        "binsize_C_L", "binsize_C_R", "binsize_B_R", "CEI", "region",
    ]
    if header != expected:
        raise ValueError(f"{path}: unexpected columns {header}")
    reports = []
    for line in lines[1:]:
        fields = line.split(",")
        if len(fields) != len(expected):
            raise ValueError(f"{path}: malformed row: {line}")
        quad = BinsizeQuad(*(float(v) for v in fields[5:9]))
        reports.append(
            DetectionReport(
                algorithm=fields[0],
                problem=fields[1],
                d=int(fields[2]),
                n_runs=0,
                source="",
                bias_rej=float(fields[3]),
                chi2_p_merged=float(fields[4]),
                quad=quad,
                cei=CeiResult(
                    per_run=np.empty(0), mean=float(fields[9]),
                    method="", replicates=0,
                ),
                region=Region(fields[10]),
                histogram=None,
            )
        )
    return reports


def cmd_audit(args: argparse.Namespace) -> int:
    opts = _Options(args)
    command = list(args.command)
    if command and command[0] == "--":
        command = command[1:]
    if not command:
        raise AuditError("no child command given; pass it after --")
    config = AuditConfig(
        problem=opts.get("problem", "f1"),
        d=opts.get("d", 2, int),
        budget=opts.get("budget", 30_000, int),
        pop=opts.get("pop", 100, int),
        algorithm=opts.get("algorithm", "external"),
        run_index=opts.get("run", 0, int),
        master_seed=opts.get("seed", 0, int),
    )
    out = opts.out_dir()
    trace = run_audit(command, config, out_dir=out)
    status = "complete" if trace.complete else "INCOMPLETE"
    print(
        f"audited {config.algorithm} on {config.problem} d={config.d}: "
        f"{trace.archive_X.shape[0]}/{config.budget} evaluations, {status}; "
        f"trace under {os.path.join(out, config.algorithm)}"
    )
    return 0


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mobias",
        description=(
            "Structural-bias probes for multi-objective optimisers: "
            "position-blind test problems, reference optimisers, and a "
            "search-space uniformity detector."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key = value config file mirroring the flags")
        p.add_argument("--seed", type=int, help="master seed (default 0)")

    p = sub.add_parser("problems", help="sample or characterise one test problem")
    add_common(p)
    p.add_argument("problem", choices=PROBLEM_IDS)
    p.add_argument("-d", type=int, help="decision-space dimension (default 2)")
    p.add_argument("-n", type=int, help="sample size (default 1000; 10000 when characterising)")
    p.add_argument(
        "--characterise",
        action="store_true",
        help="print non-dominated count, objective correlation and scaling table",
    )
    p.add_argument("--front-svg", help="also write an objective scatter with the analytic envelope")
    p.set_defaults(func=cmd_problems)

    p = sub.add_parser("run", help="run a built-in optimiser over the problem suite")
    add_common(p)
    p.add_argument("algorithm", choices=ALGORITHM_IDS)
    p.add_argument("-p", "--problems", type=_csv_items, help="comma-separated problem ids (default all)")
    p.add_argument("-d", "--dims", type=_dims, help="comma-separated dimensions (default 2,10)")
    p.add_argument("--runs", type=int, help="repetitions per problem and dimension (default 100)")
    p.add_argument("--pop", type=int, help="population size (default 100)")
    p.add_argument("--iters", type=int, help="iterations including initialisation (default 300)")
    p.add_argument(
        "--bound",
        choices=[mode.value for mode in BoundHandling],
        help="bound-constraint handling (default saturate)",
    )
    p.add_argument("-o", "--out", help=f"output directory (default ${_OUT_ENV} or {_DEFAULT_OUT})")
    p.add_argument("--workers", type=int, help="parallel worker processes (default 1)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("detect", help="score a directory of trace files")
    add_common(p)
    p.add_argument("trace_dir")
    p.add_argument("-o", "--out", help=f"output directory (default ${_OUT_ENV} or {_DEFAULT_OUT})")
    p.add_argument("--source", choices=("X_P", "X_L"), help="point set for the sampled tests (default X_P)")
    p.add_argument(
        "--alpha",
        type=float,
        help=f"test level, one of {sorted(AD_CRITICAL_VALUES)} (default 0.01)",
    )
    p.add_argument("--reps", type=int, help="sampling repetitions (default 10)")
    p.add_argument("--bins", type=int, help="histogram bins (default 20)")
    p.add_argument("--tau", type=float, help="region tolerance around binsize sum 2 (default 0.5)")
    p.add_argument("--cei-method", choices=("monte-carlo", "analytic"), help="nearest-neighbour baseline (default monte-carlo)")
    p.add_argument("--cei-replicates", type=int, help="calibration replicates (default 1000)")
    p.add_argument("--sampling-seed", type=int, help="seed for the sampling repetitions (default 0)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("report", help="re-render tables and region map from a report CSV")
    add_common(p)
    p.add_argument("report_csv")
    p.add_argument("-o", "--out", help=f"output directory (default ${_OUT_ENV} or {_DEFAULT_OUT})")
    p.add_argument("--tau", type=float, help="region tolerance (default 0.5)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("audit", help="audit an external optimiser over stdio")
    add_common(p)
    p.add_argument("-p", "--problem", choices=PROBLEM_IDS, help="problem id (default f1)")
    p.add_argument("-d", type=int, help="decision-space dimension (default 2)")
    p.add_argument("--budget", type=int, help="evaluation budget (default 30000)")
    p.add_argument("--pop", type=int, help="expected final population size (default 100)")
    p.add_argument("--algorithm", help="label recorded in the trace (default external)")
    p.add_argument("--run", type=int, help="run index for seed derivation (default 0)")
    p.add_argument("-o", "--out", help=f"output directory (default ${_OUT_ENV} or {_DEFAULT_OUT})")
    p.add_argument("command", nargs=argparse.REMAINDER, help="child command after --")
    p.set_defaults(func=cmd_audit)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr
    )
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, TraceError, AuditError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
