"""Command-line front end: reproducible experiments, versioned reports.

Subcommands
-----------
* ``exact``          exact law of S_N with moments and variance
* ``turns``          turn-count law and characteristic function
* ``limit``          density/CDF/moment grids for a limit family
* ``classify``       regime report for a schedule over a horizon grid
* ``simulate``       Monte Carlo summary of scaled sums
* ``verify``         Monte Carlo vs limit law; exit 0 pass / 1 fail
* ``appendix-check`` growth-constant ratio table for subcritical sums

Every JSON report embeds ``"schema": 1`` and serializes floats at 17
significant digits, so a pinned (configuration, seed) pair reproduces the
output byte for byte.  Usage errors exit with status 2 and a message on
standard error; computation failures exit with status 1.

The default seed is 0 and can be overridden with the ``COINTURN_SEED``
environment variable (an explicit ``--seed`` always wins).
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional

import numpy as np

from . import __version__
from .classify import classify_empirical
from .exact import (
    HorizonCapError,
    appendix_q_ratios,
    exact_law,
    exact_moment,
    turn_count_cf,
    turn_count_pmf,
    variance_of_sum,
)
from .limits import GaussianLimit, density_grid, parse_limit_law
from .montecarlo import auto_target, simulate_paths, verify
from .reports import SCHEMA_VERSION, render_csv, render_json
from .schedules import ScheduleError, parse_schedule

__all__ = ["main", "build_parser"]

SEED_ENV_VAR = "COINTURN_SEED"


class UsageError(ValueError):
    """Invalid flag combination or argument value (exit status 2)."""


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


def _parse_horizons(text: str) -> "list[int]":
    try:
        values = [int(part) for part in text.split(",") if part]
    except ValueError:
        raise UsageError(f"horizons must be comma-separated integers, got {text!r}") from None
    if not values:
        raise UsageError("horizon list is empty")
    return values


def _add_output_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format", choices=("json", "csv"), default="json", help="report format (default json)"
    )
    parser.add_argument("--out", default=None, help="write the report to this file instead of stdout")


def _add_schedule_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--schedule",
        required=True,
        help="schedule text: const:p=X | power:a=X,gamma=Y | critical:a=X "
        "| summable:a=X,beta=Y | table:PATH",
    )


def _add_seed_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help=f"master seed (default 0, or the {SEED_ENV_VAR} environment variable)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cointurn",
        description="Coin-turning processes: exact laws, limit laws, and Monte Carlo checks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="exact law of S_N with moments and variance")
    _add_schedule_option(p)
    p.add_argument("--n", type=int, required=True, help="horizon N")
    p.add_argument("--moments", type=int, default=4, help="report moments up to this order")
    _add_output_options(p)

    p = sub.add_parser("turns", help="turn-count law and characteristic function")
    _add_schedule_option(p)
    p.add_argument("--n", type=int, required=True, help="horizon n")
    p.add_argument("--cf-points", type=int, default=9, help="characteristic-function grid size on [0, pi]")
    _add_output_options(p)

    p = sub.add_parser("limit", help="density/CDF/moment grids for a limit family")
    p.add_argument(
        "--law",
        required=True,
        help="limit law: beta:a=X | gaussian:sigma2=X[,exponent=Y] | degenerate",
    )
    p.add_argument("--points", type=int, default=201, help="grid size (default 201)")
    p.add_argument("--moments", type=int, default=8, help="report moments up to this order")
    p.add_argument("--xmin", type=float, default=None, help="grid lower bound")
    p.add_argument("--xmax", type=float, default=None, help="grid upper bound")
    _add_output_options(p)

    p = sub.add_parser("classify", help="regime report over a horizon grid")
    _add_schedule_option(p)
    p.add_argument("--horizons", required=True, help="comma-separated ascending horizons")
    p.add_argument("--order", type=int, default=4, help="even moment order for the LLN evidence")
    p.add_argument("--theta-tol", type=float, default=0.15, help="tolerance on the fitted exponent")
    p.add_argument("--block-ratio", type=float, default=0.7, help="dyadic block-sum ratio threshold")
    p.add_argument("--decay-ratio", type=float, default=0.9, help="geometric decay ratio threshold")
    _add_output_options(p)

    p = sub.add_parser("simulate", help="Monte Carlo summary of scaled sums")
    _add_schedule_option(p)
    p.add_argument("--n", type=int, required=True, help="horizon N")
    p.add_argument("--paths", type=int, required=True, help="number of independent paths")
    _add_seed_option(p)
    p.add_argument(
        "--exponent",
        default="auto",
        help="scaling exponent for S_N / N^e, or 'auto' for the regime default",
    )
    p.add_argument("--threads", type=int, default=1, help="worker threads (never changes results)")
    p.add_argument("--bins", type=int, default=101, help="histogram bins (default 101)")
    p.add_argument("--sample-cap", type=int, default=10_000, help="raw samples kept in the report")
    p.add_argument(
        "--target",
        default="auto",
        help="limit law for the CSV density column (law text or 'auto'; JSON ignores this)",
    )
    _add_output_options(p)

    p = sub.add_parser("verify", help="Monte Carlo vs limit law; exit 0 pass / 1 fail")
    _add_schedule_option(p)
    p.add_argument("--n", type=int, required=True, help="horizon N")
    p.add_argument("--paths", type=int, required=True, help="number of independent paths")
    _add_seed_option(p)
    p.add_argument("--target", default="auto", help="limit law text or 'auto' (default)")
    p.add_argument("--ks-threshold", type=float, default=0.02, help="KS pass threshold")
    p.add_argument("--z-threshold", type=float, default=4.0, help="moment z-score pass threshold")
    p.add_argument("--threads", type=int, default=1, help="worker threads (never changes results)")
    p.add_argument(
        "--sigma2-convention",
        choices=("one-minus-gamma", "one-plus-gamma"),
        default=None,
        help="force the subcritical sigma^2 constant instead of the oracle choice",
    )
    _add_output_options(p)

    p = sub.add_parser("appendix-check", help="growth-constant ratio table for subcritical sums")
    p.add_argument("--gamma", type=float, required=True, help="exponent in (0, 1)")
    p.add_argument("--c", type=float, required=True, help="rate constant c > 0")
    p.add_argument("--k", type=int, default=2, help="even pair order (default 2)")
    p.add_argument("--n0", type=int, default=1, help="start index (default 1)")
    p.add_argument("--horizons", required=True, help="comma-separated ascending horizons")
    _add_output_options(p)

    return parser


def _report(payload: dict) -> dict:
    return {"schema": SCHEMA_VERSION, **payload}


def _cmd_exact(args):
    schedule = parse_schedule(args.schedule)
    if args.moments < 0:
        raise UsageError("--moments must be >= 0")
    law = exact_law(schedule, args.n)
    moments = {str(k): exact_moment(law, k) for k in range(1, args.moments + 1)}
    payload = _report(
        {
            "command": "exact",
            "schedule": schedule.label,
            "n": args.n,
            "law": law.to_dict(),
            "moments": moments,
            "variance": variance_of_sum(schedule, args.n),
        }
    )
    return render_json(payload), 0


def _cmd_turns(args):
    schedule = parse_schedule(args.schedule)
    if args.cf_points < 2:
        raise UsageError("--cf-points must be >= 2")
    law = turn_count_pmf(schedule, args.n)
    grid = np.linspace(0.0, np.pi, args.cf_points)
    values = turn_count_cf(schedule, args.n, grid)
    payload = _report(
        {
            "command": "turns",
            "schedule": schedule.label,
            "n": args.n,
            "law": law.to_dict(),
            "cf": {
                "t": [float(t) for t in grid],
                "real": [float(v.real) for v in values],
                "imag": [float(v.imag) for v in values],
            },
        }
    )
    return render_json(payload), 0


def _cmd_limit(args):
    law = parse_limit_law(args.law)
    if args.moments < 0:
        raise UsageError("--moments must be >= 0")
    x, density, cdf = density_grid(law, points=args.points, lo=args.xmin, hi=args.xmax)
    if args.format == "csv":
        rows = zip(x.tolist(), density.tolist(), cdf.tolist())
        return render_csv(("x", "f(x)", "F(x)"), rows), 0
    payload = _report(
        {
            "command": "limit",
            "law": law.to_dict(),
            "grid": {
                "x": [float(v) for v in x],
                "density": [float(v) for v in density],
                "cdf": [float(v) for v in cdf],
            },
            "moments": {str(k): law.moment(k) for k in range(1, args.moments + 1)},
        }
    )
    return render_json(payload), 0


def _cmd_classify(args):
    schedule = parse_schedule(args.schedule)
    report = classify_empirical(
        schedule,
        _parse_horizons(args.horizons),
        order=args.order,
        theta_tolerance=args.theta_tol,
        block_ratio=args.block_ratio,
        decay_ratio=args.decay_ratio,
    )
    payload = _report({"command": "classify", **report.to_dict()})
    return render_json(payload), 0


def _histogram_csv(edges, counts, density) -> str:
    rows = zip(edges[:-1].tolist(), edges[1:].tolist(), counts.tolist(), density)
    return render_csv(("bin_left", "bin_right", "count", "theoretical_density"), rows)


def _cmd_simulate(args):
    schedule = parse_schedule(args.schedule)
    exponent = args.exponent
    if exponent != "auto":
        try:
            exponent = float(exponent)
        except ValueError:
            raise UsageError(f"--exponent must be a number or 'auto', got {exponent!r}") from None
    summary = simulate_paths(
        schedule,
        args.n,
        args.paths,
        args.seed if args.seed is not None else _default_seed(),
        scaling_exponent=exponent,
        threads=args.threads,
        bins=args.bins,
        sample_cap=args.sample_cap,
    )
    if args.format == "csv":
        law = parse_limit_law(args.target) if args.target != "auto" else auto_target(schedule)[0]
        centers = 0.5 * (summary.histogram_edges[:-1] + summary.histogram_edges[1:])
        density = [float(d) for d in np.asarray(law.density(centers), dtype=float)]
        return _histogram_csv(summary.histogram_edges, summary.histogram_counts, density), 0
    payload = _report({"command": "simulate", **summary.to_dict()})
    return render_json(payload), 0


def _cmd_verify(args):
    schedule = parse_schedule(args.schedule)
    target = args.target if args.target == "auto" else parse_limit_law(args.target)
    report = verify(
        schedule,
        args.n,
        args.paths,
        args.seed if args.seed is not None else _default_seed(),
        target=target,
        ks_threshold=args.ks_threshold,
        z_threshold=args.z_threshold,
        threads=args.threads,
        sigma2_convention=args.sigma2_convention,
    )
    status = 0 if report.passed else 1
    if args.format == "csv":
        density = [float(d) for d in report.target_density]
        return _histogram_csv(report.histogram_edges, report.histogram_counts, density), status
    payload = _report({"command": "verify", **report.to_dict()})
    return render_json(payload), status


def _cmd_appendix_check(args):
    horizons = _parse_horizons(args.horizons)
    ratios = appendix_q_ratios(args.c, args.gamma, args.k, horizons, n0=args.n0)
    if args.format == "csv":
        return render_csv(("n", "ratio"), zip(horizons, ratios)), 0
    payload = _report(
        {
            "command": "appendix-check",
            "gamma": args.gamma,
            "c": args.c,
            "k": args.k,
            "n0": args.n0,
            "rows": [{"n": n, "ratio": r} for n, r in zip(horizons, ratios)],
        }
    )
    return render_json(payload), 0


_JSON_ONLY = {"exact", "turns", "classify"}

_COMMANDS = {
    "exact": _cmd_exact,
    "turns": _cmd_turns,
    "limit": _cmd_limit,
    "classify": _cmd_classify,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
    "appendix-check": _cmd_appendix_check,
}


def main(argv: Optional["list[str]"] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "format", "json") == "csv" and args.command in _JSON_ONLY:
            raise UsageError(f"subcommand {args.command!r} only produces JSON reports")
        text, status = _COMMANDS[args.command](args)
    except (UsageError, ScheduleError, HorizonCapError, ValueError) as exc:
        print(f"cointurn: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # computation failure: nonzero with diagnostic
        print(f"cointurn: failed: {exc}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
