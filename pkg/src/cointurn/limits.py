"""Scaling limits of coin-turning sums and their densities, moments, and
samplers.

Three families cover every regime:

* ``DegeneratePair`` -- the frozen-coin limit: mass 1/2 at -1 and +1 on the
  S_N/N scale (turning stops after finitely many steps).
* ``SymmetricBeta(a)`` -- the critical family p_n = a/n: density
  proportional to (1 - x^2)^(a-1) on (-1, 1).  a = 1 is the uniform law,
  a = 1/2 the arcsine law, a = 3/2 the semicircle.
* ``GaussianLimit(sigma2, exponent)`` -- subcritical power schedules
  (S_N / N^{(1+gamma)/2}) and constant schedules (S_N / sqrt(N)).

The moment generating function of the symmetric beta family is a modified
Bessel function of the first kind; a small log-space power-series
implementation is included and cross-checked against quadrature.

Two closed-form candidates circulate for the subcritical limiting variance,
1/(a(1-gamma)) and 1/(a(1+gamma)).  They disagree for gamma > 0, so
:func:`resolve_sigma2_convention` extrapolates the exact variance of S_N and
picks the constant the data actually approaches; run reports carry both
candidates together with the measured limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Optional, Tuple, Union

import numpy as np
from scipy.special import betainc, ndtr

from .exact import variance_profile

__all__ = [
    "DegeneratePair",
    "SymmetricBeta",
    "GaussianLimit",
    "LimitLaw",
    "ConventionResolution",
    "SIGMA2_CONVENTIONS",
    "DEFAULT_SIGMA2_CONVENTION",
    "bessel_i",
    "symmetric_beta_density",
    "symmetric_beta_moment",
    "symmetric_beta_cdf",
    "beta_mgf",
    "subcritical_sigma2",
    "resolve_sigma2_convention",
    "constant_regime_sigma2",
    "gaussian_moment",
    "sample_limit",
    "parse_limit_law",
    "density_grid",
]


def _check_shape(a: float) -> None:
    if not a > 0.0:
        raise ValueError(f"shape parameter must be positive, got {a!r}")


def bessel_i(alpha: float, x: float) -> float:
    """Modified Bessel function of the first kind, by its power series.

    Terms are formed in log space,
    exp((2m + alpha) log(x/2) - lgamma(m+1) - lgamma(m+alpha+1)), so large
    arguments never overflow intermediate factorials; summation stops once a
    decreasing term drops below 1e-17 of the partial sum.  Relative accuracy
    is ~1e-13 for 0 <= x <= 50 and alpha >= -1/2, which covers every use in
    this package.
    """
    if alpha < -0.5:
        raise ValueError(f"order must be >= -1/2, got {alpha!r}")
    if x < 0.0:
        raise ValueError(f"argument must be >= 0, got {x!r}")
    if x == 0.0:
        if alpha == 0.0:
            return 1.0
        return 0.0 if alpha > 0.0 else math.inf
    log_half_x = math.log(0.5 * x)
    total = 0.0
    previous = math.inf
    for m in range(500):
        term = math.exp(
            (2 * m + alpha) * log_half_x - math.lgamma(m + 1) - math.lgamma(m + alpha + 1)
        )
        total += term
        if term < previous and term <= 1e-17 * total:
            break
        previous = term
    return total


def symmetric_beta_density(a: float, x) -> Union[float, np.ndarray]:
    """Density of the symmetric beta-type law on (-1, 1):

        f(x) = Gamma(a + 1/2) / (Gamma(a) sqrt(pi)) * (1 - x^2)^(a - 1),

    and 0 for |x| >= 1.  Accepts scalar or array x.
    """
    _check_shape(a)
    xv = np.asarray(x, dtype=float)
    norm = math.exp(math.lgamma(a + 0.5) - math.lgamma(a) - 0.5 * math.log(math.pi))
    inside = np.abs(xv) < 1.0
    base = np.where(inside, 1.0 - xv * xv, 1.0)
    values = np.where(inside, norm * base ** (a - 1.0), 0.0)
    if np.isscalar(x) or xv.ndim == 0:
        return float(values)
    return values


def symmetric_beta_moment(a: float, order: int) -> float:
    """Raw moments of the symmetric beta-type law: 0 for odd orders and

        E X^{2m} = (2m)! Gamma(a + 1/2) / (2^{2m} Gamma(m + a + 1/2))

    for even orders, evaluated through log-gamma for stability.
    """
    _check_shape(a)
    if order < 0:
        raise ValueError(f"moment order must be >= 0, got {order}")
    if order % 2:
        return 0.0
    half = order // 2
    return math.exp(
        math.lgamma(order + 1)
        + math.lgamma(a + 0.5)
        - math.lgamma(half + a + 0.5)
        - order * math.log(2.0)
    )


def symmetric_beta_cdf(a: float, x) -> Union[float, np.ndarray]:
    """CDF of the symmetric beta-type law: the regularized incomplete beta
    function I_{(x+1)/2}(a, a).  Exact endpoints: F(-1) = 0, F(0) = 1/2,
    F(1) = 1.  Vectorized over x."""
    _check_shape(a)
    xv = np.asarray(x, dtype=float)
    u = np.clip(0.5 * (xv + 1.0), 0.0, 1.0)
    values = betainc(a, a, u)
    if np.isscalar(x) or xv.ndim == 0:
        return float(values)
    return values


def beta_mgf(a: float, t: float) -> float:
    """Moment generating function of the symmetric beta-type law:

        M_a(t) = Gamma(a + 1/2) (|t|/2)^{1/2 - a} I_{a - 1/2}(|t|),

    an even function of t, with M_a(0) = 1 by continuity.  Tiny |t| falls
    back on the fourth-order moment expansion to dodge the 0 * inf prefactor
    split.
    """
    _check_shape(a)
    if t == 0.0:
        return 1.0
    x = abs(t)
    if x < 1e-6:
        return (
            1.0
            + 0.5 * x * x * symmetric_beta_moment(a, 2)
            + x**4 * symmetric_beta_moment(a, 4) / 24.0
        )
    prefactor = math.exp(math.lgamma(a + 0.5) + (0.5 - a) * math.log(0.5 * x))
    return prefactor * bessel_i(a - 0.5, x)


SIGMA2_CONVENTIONS = ("one-minus-gamma", "one-plus-gamma")

# Selected by the exact-variance extrapolation oracle (resolve_sigma2_convention):
# Var(S_N) / N^{1+gamma} approaches 1 / (a (1+gamma)).
DEFAULT_SIGMA2_CONVENTION = "one-plus-gamma"


def _check_subcritical(a: float, gamma: float) -> None:
    if not a > 0.0:
        raise ValueError(f"amplitude must be positive, got {a!r}")
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"subcritical exponent must be in (0, 1), got {gamma!r}")


def subcritical_sigma2(
    a: float, gamma: float, convention: str = DEFAULT_SIGMA2_CONVENTION
) -> float:
    """Limiting variance of S_N / N^{(1+gamma)/2} for the schedule a/n^gamma.

    Two closed-form candidates circulate: ``"one-minus-gamma"`` gives
    1/(a(1-gamma)) and ``"one-plus-gamma"`` gives 1/(a(1+gamma)).  The
    default is the candidate selected by the exact-variance extrapolation
    (:func:`resolve_sigma2_convention`); both coincide as gamma -> 0.
    """
    _check_subcritical(a, gamma)
    if convention == "one-minus-gamma":
        return 1.0 / (a * (1.0 - gamma))
    if convention == "one-plus-gamma":
        return 1.0 / (a * (1.0 + gamma))
    raise ValueError(f"unknown sigma^2 convention {convention!r}")


@dataclass(frozen=True)
class ConventionResolution:
    """Outcome of the variance-extrapolation oracle for one (a, gamma)."""

    a: float
    gamma: float
    horizons: Tuple[int, ...]
    scaled_variances: Tuple[float, ...]  # Var(S_N) / N^{1+gamma}
    extrapolated: float  # Richardson limit of the above
    candidates: Tuple[Tuple[str, float], ...]
    relative_errors: Tuple[Tuple[str, float], ...]
    selected: str
    tolerance: float
    matched: bool  # selected candidate agrees within tolerance

    def candidate_map(self) -> Mapping[str, float]:
        return dict(self.candidates)

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "gamma": self.gamma,
            "horizons": list(self.horizons),
            "scaled_variances": list(self.scaled_variances),
            "extrapolated": self.extrapolated,
            "candidates": dict(self.candidates),
            "relative_errors": dict(self.relative_errors),
            "selected": self.selected,
            "tolerance": self.tolerance,
            "matched": self.matched,
        }


@lru_cache(maxsize=64)
def resolve_sigma2_convention(
    a: float, gamma: float, k_min: int = 10, k_max: int = 17, tolerance: float = 0.05
) -> ConventionResolution:
    """Pick the sigma^2 constant that the exact variance actually approaches.

    Computes Var(S_N) / N^{1+gamma} on the schedule a/n^gamma at the dyadic
    horizons N = 2^k_min .. 2^k_max and Richardson-extrapolates the
    O(N^{-(1-gamma)}) correction away.  The candidate within ``tolerance``
    of the extrapolated limit wins (ties go to the closer one).
    """
    from .schedules import PowerLaw

    _check_subcritical(a, gamma)
    if not 2 <= k_min < k_max:
        raise ValueError("need 2 <= k_min < k_max")
    schedule = PowerLaw(a=a, gamma=gamma)
    horizons = tuple(1 << k for k in range(k_min, k_max + 1))
    profile = variance_profile(schedule, horizons[-1])
    scaled = tuple(float(profile[n - 1]) / n ** (1.0 + gamma) for n in horizons)
    # doubling N shrinks the correction h = N^{-(1-gamma)} by 2^{-(1-gamma)}
    shrink = 2.0 ** (-(1.0 - gamma))
    refined = [
        (scaled[i + 1] - shrink * scaled[i]) / (1.0 - shrink)
        for i in range(len(scaled) - 1)
    ]
    extrapolated = refined[-1]
    candidates = (
        ("one-minus-gamma", 1.0 / (a * (1.0 - gamma))),
        ("one-plus-gamma", 1.0 / (a * (1.0 + gamma))),
    )
    rel = tuple((name, abs(extrapolated - value) / value) for name, value in candidates)
    selected = min(rel, key=lambda item: item[1])[0]
    matched = dict(rel)[selected] <= tolerance
    return ConventionResolution(
        a=a,
        gamma=gamma,
        horizons=horizons,
        scaled_variances=scaled,
        extrapolated=extrapolated,
        candidates=candidates,
        relative_errors=rel,
        selected=selected,
        tolerance=tolerance,
        matched=matched,
    )


def constant_regime_sigma2(c: float) -> float:
    """Limiting variance of S_N / sqrt(N) for the constant schedule p_n = c:
    (1 - c) / c, from the stationary-chain covariance series."""
    if not 0.0 < c < 1.0:
        raise ValueError(f"constant schedule variance needs 0 < c < 1, got {c!r}")
    return (1.0 - c) / c


def _double_factorial_odd(k: int) -> int:
    # (k)!! for odd k >= -1; (-1)!! = 1
    return math.prod(range(k, 0, -2))


def gaussian_moment(sigma2: float, order: int) -> float:
    """Moments of a centered normal: 0 for odd orders, sigma^K (K-1)!! even."""
    if not sigma2 > 0.0:
        raise ValueError(f"variance must be positive, got {sigma2!r}")
    if order < 0:
        raise ValueError(f"moment order must be >= 0, got {order}")
    if order % 2:
        return 0.0
    return sigma2 ** (order // 2) * _double_factorial_odd(order - 1)


@dataclass(frozen=True)
class DegeneratePair:
    """Fair two-point law on {-1, +1}: the frozen-coin limit of S_N / N."""

    @property
    def tag(self) -> str:
        return "degenerate-pair"

    @property
    def scaling_exponent(self) -> float:
        return 1.0

    def density(self, x):
        """Zero everywhere: the law is purely atomic (atoms at -1 and +1)."""
        xv = np.asarray(x, dtype=float)
        values = np.zeros_like(xv)
        if np.isscalar(x) or xv.ndim == 0:
            return float(values)
        return values

    def cdf(self, x):
        xv = np.asarray(x, dtype=float)
        values = np.where(xv < -1.0, 0.0, np.where(xv < 1.0, 0.5, 1.0))
        if np.isscalar(x) or xv.ndim == 0:
            return float(values)
        return values

    def moment(self, order: int) -> float:
        if order < 0:
            raise ValueError(f"moment order must be >= 0, got {order}")
        return 0.0 if order % 2 else 1.0

    def sample(self, rng: np.random.Generator, size=None):
        values = rng.integers(0, 2, size=size) * 2 - 1
        if size is None:
            return float(values)
        return values.astype(float)

    def to_dict(self) -> dict:
        return {"family": "degenerate-pair"}


@dataclass(frozen=True)
class SymmetricBeta:
    """Symmetric beta-type law on (-1, 1) with shape a; S_N / N limit of the
    critical family p_n = a/n."""

    a: float

    def __post_init__(self):
        _check_shape(self.a)

    @property
    def tag(self) -> str:
        return "symmetric-beta"

    @property
    def scaling_exponent(self) -> float:
        return 1.0

    def density(self, x):
        return symmetric_beta_density(self.a, x)

    def cdf(self, x):
        return symmetric_beta_cdf(self.a, x)

    def moment(self, order: int) -> float:
        return symmetric_beta_moment(self.a, order)

    def mgf(self, t: float) -> float:
        return beta_mgf(self.a, t)

    def sample(self, rng: np.random.Generator, size=None):
        """2 B - 1 with B a Beta(a, a) draw (numpy Generator.beta)."""
        values = 2.0 * rng.beta(self.a, self.a, size=size) - 1.0
        if size is None:
            return float(values)
        return values

    def to_dict(self) -> dict:
        return {"family": "symmetric-beta", "a": self.a}


@dataclass(frozen=True)
class GaussianLimit:
    """Centered normal limit with the scaling exponent it applies to
    (S_N / N^exponent)."""

    sigma2: float
    scaling_exponent: float = 0.5

    def __post_init__(self):
        if not self.sigma2 > 0.0:
            raise ValueError(f"variance must be positive, got {self.sigma2!r}")
        if not 0.0 < self.scaling_exponent <= 1.0:
            raise ValueError(
                f"scaling exponent must be in (0, 1], got {self.scaling_exponent!r}"
            )

    @property
    def tag(self) -> str:
        return "gaussian"

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    def density(self, x):
        xv = np.asarray(x, dtype=float)
        values = np.exp(-0.5 * xv * xv / self.sigma2) / math.sqrt(2.0 * math.pi * self.sigma2)
        if np.isscalar(x) or xv.ndim == 0:
            return float(values)
        return values

    def cdf(self, x):
        xv = np.asarray(x, dtype=float)
        values = ndtr(xv / self.sigma)
        if np.isscalar(x) or xv.ndim == 0:
            return float(values)
        return values

    def moment(self, order: int) -> float:
        return gaussian_moment(self.sigma2, order)

    def sample(self, rng: np.random.Generator, size=None):
        values = self.sigma * rng.standard_normal(size=size)
        if size is None:
            return float(values)
        return values

    def to_dict(self) -> dict:
        return {
            "family": "gaussian",
            "sigma2": self.sigma2,
            "scaling_exponent": self.scaling_exponent,
        }


LimitLaw = Union[DegeneratePair, SymmetricBeta, GaussianLimit]


def sample_limit(law: LimitLaw, rng: np.random.Generator, size=None):
    """Draw from a limit law with an explicit generator (no global state)."""
    return law.sample(rng, size=size)


def parse_limit_law(text: str) -> LimitLaw:
    """Parse a limit-law spec: ``beta:a=<x>`` | ``gaussian:sigma2=<x>[,exponent=<y>]``
    | ``degenerate``."""
    from .schedules import ScheduleParseError, _parse_params

    if text == "degenerate":
        return DegeneratePair()
    head, sep, body = text.partition(":")
    if not sep:
        raise ScheduleParseError("expected ':' after the law family", len(text))
    params = _parse_params(body, len(head) + 1)
    if head == "beta":
        if set(params) != {"a"}:
            raise ScheduleParseError("beta law takes exactly the parameter 'a'", len(head) + 1)
        return SymmetricBeta(a=params["a"])
    if head == "gaussian":
        if not {"sigma2"} <= set(params) <= {"sigma2", "exponent"}:
            raise ScheduleParseError(
                "gaussian law takes 'sigma2' and optionally 'exponent'", len(head) + 1
            )
        return GaussianLimit(
            sigma2=params["sigma2"], scaling_exponent=params.get("exponent", 0.5)
        )
    raise ScheduleParseError(f"unknown limit-law family {head!r}", 0)


def density_grid(
    law: LimitLaw, points: int = 201, lo: Optional[float] = None, hi: Optional[float] = None
):
    """Equispaced (x, density, cdf) arrays, plot-ready.

    Defaults to [-1, 1] for the compactly supported families and +-4 sigma
    for Gaussian limits.
    """
    if points < 2:
        raise ValueError(f"grid needs at least 2 points, got {points}")
    if lo is None or hi is None:
        if isinstance(law, GaussianLimit):
            span = 4.0 * law.sigma
            lo = -span if lo is None else lo
            hi = span if hi is None else hi
        else:
            lo = -1.0 if lo is None else lo
            hi = 1.0 if hi is None else hi
    if not lo < hi:
        raise ValueError(f"grid bounds must satisfy lo < hi, got ({lo}, {hi})")
    x = np.linspace(lo, hi, points)
    return x, np.asarray(law.density(x), dtype=float), np.asarray(law.cdf(x), dtype=float)
