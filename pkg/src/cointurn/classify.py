"""Regime classification for turning schedules.

The growth rate of the correlation moment sum E(N, 2) separates the regimes:

* Var(S_N) = N + 2 N^2 E(N, 2), so N^2 E(N, 2) ~ N means classical
  sqrt(N) fluctuations (constant schedules),
* N^2 E(N, 2) ~ N^theta with 1 < theta < 2 means a widened central limit
  (subcritical power schedules, theta = 1 + gamma),
* N^2 E(N, 2) ~ N^2 with E(N, 2) approaching a positive constant means the
  law of large numbers itself breaks down (critical and summable
  schedules).

``classify_analytic`` reads the regime off the schedule family;
``classify_empirical`` fits theta from exact E(N, 2) values on a horizon
grid and gathers series-convergence and moment-trend evidence.  All
verdicts are finite-N heuristics, reported next to the raw numbers they
were derived from so they can be re-derived and audited.

A closed form worth recording: for the critical schedule p_n = 1/n,

    N^2 E(N, 2) = (N - 1)(N - 2) / 6    exactly,

so E(N, 2) -> 1/6, consistent with the uniform limit's second moment
1/3 = 1/N + 2 E(N, 2) as N -> infinity.  (Enumeration confirms this, e.g.
N = 3 gives 1/3.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .exact import e_moment_profile, e_moment_sum
from .schedules import Constant, PowerLaw, Schedule, ScheduleError, Summable, Table

__all__ = [
    "Regime",
    "SeriesEvidence",
    "TrendEvidence",
    "LLNEvidence",
    "RegimeReport",
    "classify_analytic",
    "classify_empirical",
    "lln_conditions",
    "carleman_check",
    "fit_growth_exponent",
]


@dataclass(frozen=True)
class Regime:
    """One of: constant-clt, critical, subcritical-power, supercritical, unknown."""

    tag: str
    a: Optional[float] = None
    gamma: Optional[float] = None
    c: Optional[float] = None

    def to_dict(self) -> dict:
        out = {"tag": self.tag}
        for name in ("a", "gamma", "c"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out


def classify_analytic(schedule: Schedule) -> Regime:
    """Regime from the schedule family alone.

    Summable tails freeze the coin after finitely many turns, a/n is the
    critical family, a/n^gamma with gamma < 1 sits between, constants give
    the classical CLT.  Explicit tables defer to empirical evidence.
    """
    if isinstance(schedule, Constant):
        return Regime(tag="constant-clt", c=schedule.c)
    if isinstance(schedule, PowerLaw):
        if schedule.gamma == 1.0:
            return Regime(tag="critical", a=schedule.a)
        return Regime(tag="subcritical-power", a=schedule.a, gamma=schedule.gamma)
    if isinstance(schedule, Summable):
        return Regime(tag="supercritical")
    if isinstance(schedule, Table):
        return Regime(tag="unknown")
    raise ScheduleError(f"cannot classify schedule of type {type(schedule).__name__}")


def fit_growth_exponent(
    horizons: Sequence[int], values: Sequence[float]
) -> Tuple[float, float]:
    """Least-squares slope of log |values| against log horizons.

    Returns (theta_hat, standard_error).  Magnitudes guard schedules with
    negative correlation sums (p_n > 1/2); a zero value makes the fit
    undefined and yields (nan, nan).
    """
    h = np.asarray(horizons, dtype=float)
    v = np.asarray(values, dtype=float)
    if h.size != v.size or h.size < 2:
        raise ValueError("need matching horizon/value arrays with >= 2 entries")
    if np.any(v == 0.0):
        return (math.nan, math.nan)
    x = np.log(h)
    y = np.log(np.abs(v))
    xm = x - x.mean()
    sxx = float(np.dot(xm, xm))
    slope = float(np.dot(xm, y) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    if h.size > 2:
        resid = y - (intercept + slope * x)
        s2 = float(np.dot(resid, resid)) / (h.size - 2)
        stderr = math.sqrt(s2 / sxx)
    else:
        stderr = math.nan
    return (slope, stderr)


@dataclass(frozen=True)
class SeriesEvidence:
    """Dyadic-block convergence heuristic for a nonnegative-term series.

    ``block_sums[k]`` is the partial sum over (checkpoints[k]/2,
    checkpoints[k]]; geometric decay of the blocks (all ratios below the
    threshold) reads as converging evidence.
    """

    verdict: str  # "holds" | "fails" | "inconclusive"
    checkpoints: Tuple[int, ...]
    block_sums: Tuple[float, ...]
    ratios: Tuple[float, ...]
    threshold: float

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "checkpoints": list(self.checkpoints),
            "block_sums": list(self.block_sums),
            "ratios": list(self.ratios),
            "threshold": self.threshold,
        }


@dataclass(frozen=True)
class TrendEvidence:
    """Dyadic trend of E(N, K): decaying toward zero or not."""

    verdict: str  # "holds" | "fails" | "inconclusive"
    checkpoints: Tuple[int, ...]
    values: Tuple[float, ...]
    ratios: Tuple[float, ...]
    threshold: float

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "checkpoints": list(self.checkpoints),
            "values": list(self.values),
            "ratios": list(self.ratios),
            "threshold": self.threshold,
        }


@dataclass(frozen=True)
class LLNEvidence:
    """Finite-N evidence for the law-of-large-numbers conditions.

    * ``c1``: does sum_N E(N, 2)/N converge?  (strong-law route one)
    * ``c2``: does sum_N E(N, K) converge?    (strong-law route two)
    * ``wlln``: does E(N, K) tend to zero?    (weak law)
    """

    order: int
    n_max: int
    c1: SeriesEvidence
    c2: SeriesEvidence
    wlln: TrendEvidence

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "n_max": self.n_max,
            "c1": self.c1.to_dict(),
            "c2": self.c2.to_dict(),
            "wlln": self.wlln.to_dict(),
        }


def _dyadic_checkpoints(n_max: int, first: int = 8) -> "list[int]":
    out = []
    edge = first
    while edge * 2 <= n_max:
        edge *= 2
        out.append(edge)
    return out


def _series_evidence(terms: np.ndarray, threshold: float) -> SeriesEvidence:
    """Blocks over (2^k, 2^{k+1}]; all |block| ratios < threshold reads as
    converging, a final ratio at or above ~1 as diverging."""
    csum = np.cumsum(terms)
    checkpoints = _dyadic_checkpoints(terms.size)
    blocks = [float(csum[hi - 1] - csum[hi // 2 - 1]) for hi in checkpoints]
    ratios = []
    for prev, cur in zip(blocks, blocks[1:]):
        ratios.append(math.inf if prev == 0.0 else abs(cur) / abs(prev))
    if len(ratios) >= 2 and all(r < threshold for r in ratios):
        verdict = "holds"
    elif len(ratios) >= 2 and ratios[-1] >= 0.95:
        verdict = "fails"
    else:
        verdict = "inconclusive"
    return SeriesEvidence(
        verdict=verdict,
        checkpoints=tuple(checkpoints),
        block_sums=tuple(blocks),
        ratios=tuple(ratios),
        threshold=threshold,
    )


def _trend_evidence(profile: np.ndarray, threshold: float) -> TrendEvidence:
    checkpoints = _dyadic_checkpoints(profile.size)
    values = [float(profile[hi - 1]) for hi in checkpoints]
    ratios = []
    for prev, cur in zip(values, values[1:]):
        ratios.append(math.inf if prev == 0.0 else abs(cur) / abs(prev))
    if len(ratios) >= 2 and all(r < threshold for r in ratios):
        verdict = "holds"  # geometric decay toward zero
    elif len(ratios) >= 2 and values[-1] > 0.0 and min(ratios[-3:]) >= 0.98:
        verdict = "fails"  # settling on a positive constant
    else:
        verdict = "inconclusive"
    return TrendEvidence(
        verdict=verdict,
        checkpoints=tuple(checkpoints),
        values=tuple(values),
        ratios=tuple(ratios),
        threshold=threshold,
    )


def lln_conditions(
    schedule: Schedule,
    horizons: Sequence[int],
    order: int,
    block_ratio: float = 0.7,
    decay_ratio: float = 0.9,
) -> LLNEvidence:
    """Finite-N convergence evidence for the LLN conditions at one even order.

    Computes E(N, 2) and E(N, K) for every N up to max(horizons) in one
    scan, forms the partial sums of E(N, 2)/N and E(N, K), and applies the
    dyadic-block heuristic: successive block-sum ratios below
    ``block_ratio`` count as converging evidence.  The E(N, K) trend itself
    (ratios below ``decay_ratio``) backs the weak-law verdict.  No finite
    computation proves convergence; this is reported evidence, not a
    theorem.
    """
    horizons = _check_horizons(horizons, minimum_top=64)
    n_max = horizons[-1]
    profile2 = e_moment_profile(schedule, n_max, 2)
    profile_k = profile2 if order == 2 else e_moment_profile(schedule, n_max, order)
    inverse_n = 1.0 / np.arange(1, n_max + 1, dtype=float)
    return LLNEvidence(
        order=order,
        n_max=n_max,
        c1=_series_evidence(profile2 * inverse_n, block_ratio),
        c2=_series_evidence(profile_k, block_ratio),
        wlln=_trend_evidence(profile_k, decay_ratio),
    )


def carleman_check(
    mu: Sequence[float],
    orders: Optional[Sequence[int]] = None,
    decay_ratio: float = 0.9,
    floor: float = 0.1,
) -> str:
    """Moment-determinacy evidence from even-moment limits mu_K.

    Divergence of sum_K mu_K^{-1/K} over even K guarantees the moments pin
    down a unique law.  Finite data only supports heuristics: geometric
    decay of the terms (all successive ratios below ``decay_ratio``) reads
    as "converges"; terms bounded below by ``floor`` read as "diverges";
    anything else is "inconclusive".
    """
    mu = [float(m) for m in mu]
    if not mu:
        raise ValueError("need at least one moment limit")
    if any(m <= 0.0 for m in mu):
        raise ValueError("moment limits must be positive")
    if orders is None:
        orders = [2 * (i + 1) for i in range(len(mu))]
    orders = [int(k) for k in orders]
    if len(orders) != len(mu) or any(k < 2 or k % 2 for k in orders):
        raise ValueError("orders must be even, >= 2, and match the moments")
    terms = [m ** (-1.0 / k) for m, k in zip(mu, orders)]
    ratios = [b / a for a, b in zip(terms, terms[1:])]
    if ratios and all(r < decay_ratio for r in ratios):
        return "converges"
    if min(terms) >= floor:
        return "diverges"
    return "inconclusive"


@dataclass(frozen=True)
class RegimeReport:
    """Analytic plus empirical classification of one schedule.

    Every verdict is a pure function of the raw numbers stored alongside it
    (the E(N, 2) grid, the fitted exponent, the dyadic evidence), so the
    flags can be re-derived in tests and audits.
    """

    schedule_label: str
    analytic: Regime
    horizons: Tuple[int, ...]
    e2: Tuple[float, ...]  # E(N, 2) at each horizon
    n2_e2: Tuple[float, ...]  # N^2 E(N, 2) at each horizon
    theta_hat: float
    theta_stderr: float
    theta_tolerance: float
    flags: Tuple[Tuple[str, str], ...]  # crucial / second-crucial / no-lln
    clause: str  # "i" | "ii" | "iii" | "unknown"
    lln: LLNEvidence
    mu_estimates: Tuple[Tuple[int, float], ...]
    carleman: Optional[str]

    def flag(self, name: str) -> str:
        return dict(self.flags)[name]

    def theta_band(self) -> Tuple[float, float]:
        """Two-standard-error confidence band around the fitted exponent."""
        if math.isnan(self.theta_stderr):
            return (self.theta_hat, self.theta_hat)
        return (self.theta_hat - 2.0 * self.theta_stderr, self.theta_hat + 2.0 * self.theta_stderr)

    def to_dict(self) -> dict:
        band = self.theta_band()
        return {
            "schedule": self.schedule_label,
            "analytic": self.analytic.to_dict(),
            "horizons": list(self.horizons),
            "e2": list(self.e2),
            "n2_e2": list(self.n2_e2),
            "theta_hat": self.theta_hat,
            "theta_stderr": self.theta_stderr,
            "theta_band": [band[0], band[1]],
            "theta_tolerance": self.theta_tolerance,
            "flags": dict(self.flags),
            "clause": self.clause,
            "lln": self.lln.to_dict(),
            "mu_estimates": {str(k): v for k, v in self.mu_estimates},
            "carleman": self.carleman,
        }


def _check_horizons(horizons: Sequence[int], minimum_top: int) -> "list[int]":
    out = [int(h) for h in horizons]
    if any(h < 2 for h in out):
        raise ValueError("horizons must all be >= 2")
    if sorted(set(out)) != out:
        raise ValueError("horizons must be strictly ascending")
    if out and out[-1] < minimum_top:
        raise ValueError(f"largest horizon must be >= {minimum_top}, got {out[-1]}")
    if not out:
        raise ValueError("need at least one horizon")
    return out


def _derive_flags(
    theta: float, e2: Sequence[float], tolerance: float
) -> Tuple[Tuple[Tuple[str, str], ...], str]:
    """Flags and conjecture clause from the fitted exponent and E(N, 2) grid.

    * crucial:        E(N, 2) = O(1/N), read as theta_hat <= 1 + tolerance
                      (O is an upper bound, so slower growth also qualifies);
    * second-crucial: E(N, 2) -> 0, read as theta_hat < 2 - tolerance;
    * no-lln:         E(N, 2) non-decreasing toward a positive value with
                      theta_hat ~ 2.
    """
    if math.isnan(theta):
        flags = (
            ("crucial", "inconclusive"),
            ("second-crucial", "inconclusive"),
            ("no-lln", "inconclusive"),
        )
        return flags, "unknown"
    crucial = "holds" if theta <= 1.0 + tolerance else "fails"
    second = "holds" if theta < 2.0 - tolerance else "fails"
    diffs = np.diff(np.asarray(e2, dtype=float))
    non_decreasing = bool(np.all(diffs >= -1e-12))
    if second == "holds":
        no_lln = "fails"
    elif non_decreasing and e2[-1] > 0.0:
        no_lln = "holds"
    else:
        no_lln = "inconclusive"
    flags = (("crucial", crucial), ("second-crucial", second), ("no-lln", no_lln))
    if crucial == "holds":
        clause = "i"
    elif second == "holds":
        clause = "ii"
    else:
        clause = "iii"
    return flags, clause


_CARLEMAN_ORDERS = (2, 4, 6, 8)


def classify_empirical(
    schedule: Schedule,
    horizons: Sequence[int],
    order: int = 4,
    theta_tolerance: float = 0.15,
    block_ratio: float = 0.7,
    decay_ratio: float = 0.9,
) -> RegimeReport:
    """Empirical regime report from exact E(N, 2) values on a horizon grid.

    Needs at least 4 strictly ascending horizons with the largest >= 1000
    (log-log fits over fewer than ~2 decades carry too much bias from
    lower-order terms; the 0.15 default tolerance on theta_hat reflects that
    scale of bias).  When the no-LLN flag fires, the even-moment limits
    mu_K ~ E(N_max, K) for K = 2..8 feed a moment-determinacy check.
    """
    horizons = _check_horizons(horizons, minimum_top=1000)
    if len(horizons) < 4:
        raise ValueError(f"need at least 4 horizons, got {len(horizons)}")
    n_max = horizons[-1]
    profile2 = e_moment_profile(schedule, n_max, 2)
    e2 = tuple(float(profile2[n - 1]) for n in horizons)
    n2_e2 = tuple(float(n) * n * v for n, v in zip(horizons, e2))
    theta, stderr = fit_growth_exponent(horizons, n2_e2)
    flags, clause = _derive_flags(theta, e2, theta_tolerance)
    lln = lln_conditions(schedule, horizons, order, block_ratio, decay_ratio)
    mu_estimates: Tuple[Tuple[int, float], ...] = ()
    carleman: Optional[str] = None
    if dict(flags)["no-lln"] == "holds":
        mu_estimates = tuple((k, e_moment_sum(schedule, n_max, k)) for k in _CARLEMAN_ORDERS)
        if all(value > 0.0 for _, value in mu_estimates):
            carleman = carleman_check(
                [value for _, value in mu_estimates], orders=_CARLEMAN_ORDERS
            )
    return RegimeReport(
        schedule_label=schedule.label,
        analytic=classify_analytic(schedule),
        horizons=tuple(horizons),
        e2=e2,
        n2_e2=n2_e2,
        theta_hat=theta,
        theta_stderr=stderr,
        theta_tolerance=theta_tolerance,
        flags=flags,
        clause=clause,
        lln=lln,
        mu_estimates=mu_estimates,
        carleman=carleman,
    )
