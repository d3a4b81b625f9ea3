"""Reproducible Monte Carlo simulation of coin-turning paths, the
Kolmogorov-Smirnov machinery, and distributional verification against limit
laws.

Reproducibility contract
------------------------
Path ``p`` draws from a Philox counter-based generator keyed by the master
seed with counter offset ``p * 2**128``: a private block of 2^128 counter
values per path, so any subset of paths can be simulated independently and
identically.  Each path consumes one uniform for the fair initial sign and
one per later step.  Work is split into fixed-size blocks of paths whose
results are written into preallocated slots, so the summary is
byte-identical no matter how many worker threads run the blocks (and the
block size itself never influences any drawn value).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .classify import classify_analytic
from .limits import (
    DEFAULT_SIGMA2_CONVENTION,
    ConventionResolution,
    DegeneratePair,
    GaussianLimit,
    LimitLaw,
    SymmetricBeta,
    constant_regime_sigma2,
    resolve_sigma2_convention,
    subcritical_sigma2,
)
from .schedules import Schedule, ScheduleError

__all__ = [
    "PATH_BLOCK",
    "DEFAULT_SAMPLE_CAP",
    "SimulationSummary",
    "VerificationReport",
    "simulate_paths",
    "ks_statistic",
    "kolmogorov_pvalue",
    "verify",
    "auto_target",
]

PATH_BLOCK = 1024  # paths per work unit; fixed so threading cannot reorder anything
DEFAULT_SAMPLE_CAP = 10_000  # raw samples retained in serialized summaries
_MOMENT_ORDERS = 8


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)):
        raise ScheduleError(f"seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) < 2**64:
        raise ScheduleError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return int(seed)


def _simulate_block(seed: int, first_path: int, count: int, probs: np.ndarray) -> np.ndarray:
    """S_N for paths [first_path, first_path + count), as int64."""
    n = probs.size
    u = np.empty((count, n))
    for row in range(count):
        bit_gen = np.random.Philox(key=seed, counter=(first_path + row) << 128)
        np.random.Generator(bit_gen).random(out=u[row])
    initial = np.where(u[:, 0] < 0.5, 1, -1).astype(np.int64)
    if n == 1:
        return initial
    steps = np.where(u[:, 1:] < probs[1:], -1, 1).astype(np.int8)
    relative = np.cumprod(steps, axis=1)  # Y_k / Y_1 for k = 2 .. N
    return initial * (1 + relative.sum(axis=1, dtype=np.int64))


@dataclass(frozen=True)
class SimulationSummary:
    """Scaled-sum sample from many independent paths.

    ``samples`` holds every scaled value S_N / N^exponent in path order; the
    serialized form truncates it to ``sample_cap`` values (the cap is part
    of the record).  Histogram: ``bins`` equal-width bins spanning [-1, 1]
    when the exponent is 1 (the full support of S_N / N) and the symmetric
    sample range otherwise.
    """

    schedule_label: str
    n: int
    paths: int
    seed: int
    scaling_exponent: float
    moments: Tuple[float, ...]  # orders 1 .. 8
    histogram_edges: np.ndarray
    histogram_counts: np.ndarray
    samples: np.ndarray
    sample_cap: int = DEFAULT_SAMPLE_CAP

    def moment(self, order: int) -> float:
        if not 1 <= order <= len(self.moments):
            raise ValueError(f"summary stores moments 1..{len(self.moments)}")
        return self.moments[order - 1]

    def to_dict(self) -> dict:
        retained = self.samples[: self.sample_cap]
        return {
            "schedule": self.schedule_label,
            "n": self.n,
            "paths": self.paths,
            "seed": self.seed,
            "scaling_exponent": self.scaling_exponent,
            "moments": {str(k + 1): float(m) for k, m in enumerate(self.moments)},
            "histogram": {
                "edges": [float(e) for e in self.histogram_edges],
                "counts": [int(c) for c in self.histogram_counts],
            },
            "sample": {
                "cap": self.sample_cap,
                "retained": int(retained.size),
                "values": [float(v) for v in retained],
            },
        }


def _resolve_exponent(schedule: Schedule, scaling_exponent) -> float:
    if scaling_exponent != "auto":
        value = float(scaling_exponent)
        if not 0.0 < value <= 1.0:
            raise ScheduleError(f"scaling exponent must be in (0, 1], got {value}")
        return value
    regime = classify_analytic(schedule)
    if regime.tag == "subcritical-power":
        return (1.0 + regime.gamma) / 2.0
    if regime.tag == "constant-clt":
        return 0.5
    # critical, supercritical, unknown: S_N / N is always well defined
    return 1.0


def simulate_paths(
    schedule: Schedule,
    n: int,
    paths: int,
    seed: int,
    scaling_exponent: Union[str, float] = "auto",
    threads: int = 1,
    bins: int = 101,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
) -> SimulationSummary:
    """Simulate ``paths`` independent processes to horizon ``n`` and collect
    the scaled sums S_N / N^exponent.

    Each path costs O(N) time and O(1) state.  ``scaling_exponent="auto"``
    picks the regime-appropriate normalization from the schedule family.
    The result is byte-identical for fixed (schedule, n, paths, seed)
    regardless of ``threads``.
    """
    if n < 1:
        raise ScheduleError(f"horizon must be >= 1, got {n}")
    if paths < 1:
        raise ScheduleError(f"path count must be >= 1, got {paths}")
    if threads < 1:
        raise ScheduleError(f"thread count must be >= 1, got {threads}")
    if bins < 1:
        raise ScheduleError(f"histogram needs >= 1 bin, got {bins}")
    seed = _check_seed(seed)
    exponent = _resolve_exponent(schedule, scaling_exponent)
    probs = schedule.probabilities(n)
    sums = np.empty(paths, dtype=np.int64)
    starts = list(range(0, paths, PATH_BLOCK))

    def run_block(start: int) -> None:
        count = min(PATH_BLOCK, paths - start)
        sums[start : start + count] = _simulate_block(seed, start, count, probs)

    if threads == 1 or len(starts) == 1:
        for start in starts:
            run_block(start)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run_block, starts))

    scaled = sums / float(n) ** exponent
    powers = scaled.copy()
    moments = []
    for _ in range(_MOMENT_ORDERS):
        moments.append(float(powers.mean()))
        powers *= scaled
    if exponent == 1.0:
        span = 1.0
    else:
        span = float(np.max(np.abs(scaled)))
        if span == 0.0:
            span = 1.0
    edges = np.linspace(-span, span, bins + 1)
    counts, _ = np.histogram(scaled, bins=edges)
    return SimulationSummary(
        schedule_label=schedule.label,
        n=n,
        paths=paths,
        seed=seed,
        scaling_exponent=exponent,
        moments=tuple(moments),
        histogram_edges=edges,
        histogram_counts=counts,
        samples=scaled,
        sample_cap=sample_cap,
    )


def ks_statistic(sample: Sequence[float], cdf: Callable) -> float:
    """Supremum distance between the empirical CDF of ``sample`` and ``cdf``.

    Both one-sided gaps are taken at every data point: with the sample
    sorted ascending, D = max_i max(i/M - F(x_i), F(x_i) - (i-1)/M).
    """
    x = np.sort(np.asarray(sample, dtype=float))
    if x.size == 0:
        raise ValueError("Kolmogorov-Smirnov statistic needs a nonempty sample")
    f = np.asarray(cdf(x), dtype=float)
    ranks = np.arange(1, x.size + 1, dtype=float)
    m = float(x.size)
    d_plus = float(np.max(ranks / m - f))
    d_minus = float(np.max(f - (ranks - 1.0) / m))
    return max(d_plus, d_minus, 0.0)


def kolmogorov_pvalue(statistic: float, size: int) -> float:
    """Asymptotic Kolmogorov tail probability

        P(sqrt(M) D > lambda) ~ 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2),

    with lambda = sqrt(size) * statistic.  Adequate for size >= ~1e4; below
    lambda = 0.2 the tail is 1 to thirteen digits and is returned as 1.
    """
    if statistic < 0.0 or size < 1:
        raise ValueError("need statistic >= 0 and size >= 1")
    lam = math.sqrt(size) * statistic
    if lam < 0.2:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, 400):
        term = math.exp(-2.0 * (j * lam) ** 2)
        total += sign * term
        if term < 1e-16:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def auto_target(
    schedule: Schedule, sigma2_convention: Optional[str] = None
) -> Tuple[LimitLaw, Optional[ConventionResolution]]:
    """Limit law (with its scaling) implied by the schedule family.

    For subcritical power schedules the sigma^2 constant comes from the
    variance-extrapolation oracle unless a convention is forced; the
    resolution record rides along for reporting.
    """
    regime = classify_analytic(schedule)
    if regime.tag == "critical":
        return SymmetricBeta(a=regime.a), None
    if regime.tag == "subcritical-power":
        resolution = resolve_sigma2_convention(regime.a, regime.gamma)
        convention = sigma2_convention or resolution.selected
        sigma2 = subcritical_sigma2(regime.a, regime.gamma, convention)
        return GaussianLimit(sigma2=sigma2, scaling_exponent=(1.0 + regime.gamma) / 2.0), resolution
    if regime.tag == "constant-clt":
        return GaussianLimit(sigma2=constant_regime_sigma2(regime.c), scaling_exponent=0.5), None
    if regime.tag == "supercritical":
        return DegeneratePair(), None
    raise ScheduleError(
        "automatic target selection needs an analytically classifiable schedule; "
        "pass an explicit limit law for table schedules"
    )


@dataclass(frozen=True)
class VerificationReport:
    """Monte Carlo comparison of scaled sums against a limit law.

    The verdict is a pure function of the stored statistics and thresholds:
    pass means KS <= ks_threshold and every moment z-score is defined with
    |z| <= z_threshold.
    """

    schedule_label: str
    n: int
    paths: int
    seed: int
    target: dict
    scaling_exponent: float
    ks: float
    ks_pvalue: float
    moment_rows: Tuple[dict, ...]
    ks_threshold: float
    z_threshold: float
    passed: bool
    histogram_edges: np.ndarray
    histogram_counts: np.ndarray
    target_density: np.ndarray  # at bin centers

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        return {
            "schedule": self.schedule_label,
            "n": self.n,
            "paths": self.paths,
            "seed": self.seed,
            "target": self.target,
            "scaling_exponent": self.scaling_exponent,
            "ks": {"statistic": self.ks, "p_value": self.ks_pvalue},
            "moments": list(self.moment_rows),
            "thresholds": {"ks": self.ks_threshold, "z": self.z_threshold},
            "verdict": self.verdict,
            "histogram": {
                "edges": [float(e) for e in self.histogram_edges],
                "counts": [int(c) for c in self.histogram_counts],
                "target_density": [float(d) for d in self.target_density],
            },
        }


def _moment_rows(summary: SimulationSummary, law: LimitLaw, max_order: int = 4):
    """Sample-vs-limit moment table with z-scores.

    The standard error of the order-K sample moment is estimated from the
    sample itself: SE^2 = (m_2K - m_K^2) / M.  A zero SE with a nonzero
    discrepancy leaves z undefined (null), which fails the verdict.
    """
    rows = []
    for order in range(1, max_order + 1):
        sample_moment = summary.moment(order)
        limit_moment = law.moment(order)
        variance = summary.moment(2 * order) - sample_moment**2
        diff = sample_moment - limit_moment
        if variance > 0.0:
            z = diff / math.sqrt(variance / summary.paths)
        elif abs(diff) <= 1e-12:
            z = 0.0
        else:
            z = None
        rows.append({"order": order, "sample": sample_moment, "limit": limit_moment, "z": z})
    return tuple(rows)


def verify(
    schedule: Schedule,
    n: int,
    paths: int,
    seed: int,
    target: Union[str, LimitLaw] = "auto",
    ks_threshold: float = 0.02,
    z_threshold: float = 4.0,
    threads: int = 1,
    sigma2_convention: Optional[str] = None,
    bins: int = 101,
) -> VerificationReport:
    """Simulate, scale by the target's exponent, and test the fit.

    ``target="auto"`` derives the limit law from the schedule family
    (critical -> symmetric beta, subcritical -> Gaussian at exponent
    (1+gamma)/2 with the oracle-selected sigma^2, constant -> Gaussian at
    exponent 1/2, summable -> the +-1 pair).  The report carries the KS
    statistic with its asymptotic p-value and a moment z-score table.
    """
    resolution = None
    if isinstance(target, str):
        if target != "auto":
            raise ScheduleError(f"target must be 'auto' or a limit law, got {target!r}")
        law, resolution = auto_target(schedule, sigma2_convention)
    else:
        law = target
    summary = simulate_paths(
        schedule,
        n,
        paths,
        seed,
        scaling_exponent=law.scaling_exponent,
        threads=threads,
        bins=bins,
    )
    ks = ks_statistic(summary.samples, law.cdf)
    pvalue = kolmogorov_pvalue(ks, paths)
    rows = _moment_rows(summary, law)
    passed = ks <= ks_threshold and all(
        row["z"] is not None and abs(row["z"]) <= z_threshold for row in rows
    )
    target_info = dict(law.to_dict())
    if resolution is not None:
        target_info["sigma2_convention"] = sigma2_convention or resolution.selected
        target_info["convention_resolution"] = resolution.to_dict()
    centers = 0.5 * (summary.histogram_edges[:-1] + summary.histogram_edges[1:])
    return VerificationReport(
        schedule_label=schedule.label,
        n=n,
        paths=paths,
        seed=seed,
        target=target_info,
        scaling_exponent=summary.scaling_exponent,
        ks=ks,
        ks_pvalue=pvalue,
        moment_rows=rows,
        ks_threshold=ks_threshold,
        z_threshold=z_threshold,
        passed=passed,
        histogram_edges=summary.histogram_edges,
        histogram_counts=summary.histogram_counts,
        target_density=np.asarray(law.density(centers), dtype=float),
    )
