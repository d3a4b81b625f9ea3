"""Turning-probability schedules and pairwise sign correlations.

A coin-turning process starts from a fair sign Y_1 in {-1, +1} and at every
later step n flips the current sign with probability p_n.  This module owns
the deterministic sequence {p_n} (the *turning schedule*), a small text
grammar for building schedules, and the pairwise sign correlation

    corr(Y_i, Y_j) = prod_{k=i+1..j} (1 - 2 p_k),

which drives everything else in the package: exact laws, moment sums, and
regime classification.

The first step is always fair (p_1 = 1/2).  The symmetry of every downstream
distribution depends on it, so it is not configurable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

__all__ = [
    "Schedule",
    "Constant",
    "PowerLaw",
    "Summable",
    "Table",
    "ScheduleError",
    "ScheduleParseError",
    "ScheduleDomainError",
    "CorrelationBoundsError",
    "CorrelationAccumulator",
    "parse_schedule",
    "load_table",
    "turn_probability",
    "pair_correlation",
    "correlation_bounds",
    "first_turn_probability_above_half",
]


class ScheduleError(ValueError):
    """Base class for schedule construction and usage errors."""


class ScheduleParseError(ScheduleError):
    """Malformed schedule text; ``position`` is the character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ScheduleDomainError(ScheduleError):
    """Schedule parameter outside its legal range."""


class CorrelationBoundsError(ScheduleError):
    """The correlation sandwich needs p_k <= 1/2 on the whole range.

    ``index`` is the first step in the range that violates the requirement.
    """

    def __init__(self, index: int, value: float):
        super().__init__(
            f"correlation bounds require p_k <= 1/2 on the range; "
            f"p_{index} = {value:g} violates this"
        )
        self.index = index


@dataclass(frozen=True)
class Schedule:
    """Base class for turning schedules.

    Subclasses implement ``_tail(ks)``, the raw (unclamped) formula for the
    turn probabilities at steps ``ks >= 2``.  ``p_1`` is pinned to 1/2 and
    every later value is clamped into [0, 1] after formula evaluation.
    """

    def _tail(self, ks: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def label(self) -> str:
        raise NotImplementedError

    def turn_probability(self, n: int) -> float:
        """The probability of turning the coin at step n (1/2 at n = 1)."""
        if n < 1:
            raise ScheduleError(f"step index must be >= 1, got {n}")
        if n == 1:
            return 0.5
        raw = float(self._tail(np.array([n], dtype=float))[0])
        return min(1.0, max(0.0, raw))

    def probabilities(self, n: int) -> np.ndarray:
        """p_1 .. p_n as a float array (p_1 = 1/2, the rest clamped)."""
        if n < 1:
            raise ScheduleError(f"horizon must be >= 1, got {n}")
        out = np.empty(n, dtype=float)
        out[0] = 0.5
        if n > 1:
            ks = np.arange(2, n + 1, dtype=float)
            out[1:] = np.clip(self._tail(ks), 0.0, 1.0)
        return out

    def step_factors(self, n: int) -> np.ndarray:
        """The correlation step factors 1 - 2 p_k for k = 2 .. n."""
        return 1.0 - 2.0 * self.probabilities(n)[1:]


@dataclass(frozen=True)
class Constant(Schedule):
    """p_n = c for every n >= 2."""

    c: float

    def __post_init__(self):
        if not 0.0 < self.c <= 1.0:
            raise ScheduleDomainError(f"constant probability must be in (0, 1], got {self.c!r}")

    def _tail(self, ks):
        return np.full(ks.shape, self.c)

    @property
    def label(self):
        return f"const:p={self.c:g}"


@dataclass(frozen=True)
class PowerLaw(Schedule):
    """p_n = a / n^gamma with gamma in (0, 1]; gamma = 1 is the critical family."""

    a: float
    gamma: float

    def __post_init__(self):
        if not self.a > 0.0:
            raise ScheduleDomainError(f"power-law amplitude must be positive, got {self.a!r}")
        if not 0.0 < self.gamma <= 1.0:
            raise ScheduleDomainError(f"power-law exponent must be in (0, 1], got {self.gamma!r}")

    def _tail(self, ks):
        return self.a / ks**self.gamma

    @property
    def label(self):
        if self.gamma == 1.0:
            return f"critical:a={self.a:g}"
        return f"power:a={self.a:g},gamma={self.gamma:g}"


@dataclass(frozen=True)
class Summable(Schedule):
    """p_n = a / n^beta with beta > 1, so the turn probabilities are summable."""

    a: float
    beta: float

    def __post_init__(self):
        if not self.a > 0.0:
            raise ScheduleDomainError(f"summable amplitude must be positive, got {self.a!r}")
        if not self.beta > 1.0:
            raise ScheduleDomainError(f"summable exponent must be > 1, got {self.beta!r}")

    def _tail(self, ks):
        return self.a / ks**self.beta

    @property
    def label(self):
        return f"summable:a={self.a:g},beta={self.beta:g}"


@dataclass(frozen=True)
class Table(Schedule):
    """Explicit probabilities for steps 2, 3, ... with a tail rule.

    ``probs[0]`` is p_2 (the first step is always fair).  Past the end of the
    table, ``tail="repeat"`` repeats the last entry and ``tail="zero"`` stops
    all turning.
    """

    probs: Tuple[float, ...]
    tail: str = "repeat"
    source: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if not self.probs:
            raise ScheduleDomainError("table schedule needs at least one probability")
        for i, p in enumerate(self.probs):
            if not 0.0 <= p <= 1.0:
                raise ScheduleDomainError(f"table entry {i + 1} = {p!r} is not a probability")
        if self.tail not in ("repeat", "zero"):
            raise ScheduleDomainError(f"tail rule must be 'repeat' or 'zero', got {self.tail!r}")

    def _tail(self, ks):
        idx = ks.astype(int) - 2
        table = np.asarray(self.probs)
        fill = table[-1] if self.tail == "repeat" else 0.0
        return np.where(idx < table.size, table[np.minimum(idx, table.size - 1)], fill)

    @property
    def label(self):
        if self.source is not None:
            return f"table:{self.source}"
        return f"table:<{len(self.probs)} entries,tail={self.tail}>"


_SCHEDULE_KINDS = ("const", "power", "critical", "summable", "table")


def _parse_params(body: str, base: int) -> "dict[str, float]":
    """Parse 'k=v,k=v' with character positions relative to the full text."""
    params: "dict[str, float]" = {}
    pos = base
    for piece in body.split(","):
        if "=" not in piece:
            raise ScheduleParseError(f"expected '<name>=<value>', got {piece!r}", pos)
        key, _, raw = piece.partition("=")
        if not key:
            raise ScheduleParseError("empty parameter name", pos)
        if key in params:
            raise ScheduleParseError(f"duplicate parameter {key!r}", pos)
        try:
            params[key] = float(raw)
        except ValueError:
            raise ScheduleParseError(
                f"not a number: {raw!r}", pos + len(key) + 1
            ) from None
        pos += len(piece) + 1
    return params


def _require_params(params, wanted, text):
    for name in wanted:
        if name not in params:
            raise ScheduleParseError(f"missing parameter {name!r}", len(text))
    for name in params:
        if name not in wanted:
            raise ScheduleParseError(f"unexpected parameter {name!r}", text.index(name + "="))


def parse_schedule(text: str) -> Schedule:
    """Build a schedule from its text form.

    Grammar::

        const:p=<x> | power:a=<x>,gamma=<y> | critical:a=<x>
        | summable:a=<x>,beta=<y> | table:<path>

    ``critical:a=<x>`` is shorthand for ``power:a=<x>,gamma=1``.  Table files
    are UTF-8, one probability per line; ``#`` starts a comment.  Raises
    :class:`ScheduleParseError` (with a character position) for grammar
    problems and :class:`ScheduleDomainError` for out-of-range parameters.
    """
    head, sep, body = text.partition(":")
    if not sep:
        raise ScheduleParseError("expected ':' after the schedule kind", len(text))
    if head not in _SCHEDULE_KINDS:
        raise ScheduleParseError(f"unknown schedule kind {head!r}", 0)
    base = len(head) + 1
    if head == "table":
        if not body:
            raise ScheduleParseError("expected a file path after 'table:'", base)
        return load_table(body)
    params = _parse_params(body, base)
    if head == "const":
        _require_params(params, ("p",), text)
        return Constant(c=params["p"])
    if head == "critical":
        _require_params(params, ("a",), text)
        return PowerLaw(a=params["a"], gamma=1.0)
    if head == "power":
        _require_params(params, ("a", "gamma"), text)
        return PowerLaw(a=params["a"], gamma=params["gamma"])
    _require_params(params, ("a", "beta"), text)
    return Summable(a=params["a"], beta=params["beta"])


def load_table(path: str, tail: str = "repeat") -> Table:
    """Read a table schedule: one probability per line, '#' comments allowed."""
    probs = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                payload = line.split("#", 1)[0].strip()
                if not payload:
                    continue
                try:
                    value = float(payload)
                except ValueError:
                    raise ScheduleError(
                        f"{path}:{lineno}: not a probability: {payload!r}"
                    ) from None
                if not 0.0 <= value <= 1.0:
                    raise ScheduleDomainError(
                        f"{path}:{lineno}: {value:g} is outside [0, 1]"
                    )
                probs.append(value)
    except OSError as exc:
        raise ScheduleError(f"cannot read table file {path!r}: {exc}") from None
    if not probs:
        raise ScheduleError(f"table file {path!r} contains no probabilities")
    return Table(probs=tuple(probs), tail=tail, source=path)


def turn_probability(schedule: Schedule, n: int) -> float:
    """Module-level alias for :meth:`Schedule.turn_probability`."""
    return schedule.turn_probability(n)


def _check_pair(i: int, j: int) -> None:
    if not (isinstance(i, (int, np.integer)) and isinstance(j, (int, np.integer))):
        raise ScheduleError(f"pair indices must be integers, got ({i!r}, {j!r})")
    if not 1 <= i <= j:
        raise ScheduleError(f"pair indices must satisfy 1 <= i <= j, got ({i}, {j})")


def pair_correlation(schedule: Schedule, i: int, j: int) -> float:
    """Corr(Y_i, Y_j) = prod_{k=i+1..j} (1 - 2 p_k).

    The empty product (i == j) is 1; a single factor of zero (some
    p_k = 1/2 in the range) makes the result exactly 0.
    """
    _check_pair(i, j)
    if i == j:
        return 1.0
    factors = schedule.step_factors(j)[i - 1 :]  # k = i+1 .. j
    if np.any(factors == 0.0):
        return 0.0
    return float(np.prod(factors))


class CorrelationAccumulator:
    """O(1) pair correlations after an O(n) prefix pass.

    Stores cumulative log-magnitudes, sign parities, and zero counts of the
    step factors 1 - 2 p_k, so that products over (i, j] never underflow even
    when they decay exponentially with j - i, and exact zeros (p_k = 1/2)
    stay exact.  Immutable after construction, hence safe to share between
    threads.
    """

    def __init__(self, schedule: Schedule, n_max: int):
        if n_max < 1:
            raise ScheduleError(f"n_max must be >= 1, got {n_max}")
        factors = schedule.step_factors(n_max)  # k = 2 .. n_max
        zero = factors == 0.0
        safe = np.where(zero, 1.0, factors)
        self.n_max = n_max
        # entry n-1 accumulates factors with k <= n; entry 0 is the identity
        self._log = np.concatenate(([0.0], np.cumsum(np.log(np.abs(safe)))))
        self._sign = np.concatenate(([1], np.cumprod(np.where(safe < 0.0, -1, 1))))
        self._zeros = np.concatenate(([0], np.cumsum(zero)))

    def is_zero(self, i: int, j: int) -> bool:
        """True when some factor in (i, j] vanishes (a fair step p_k = 1/2)."""
        _check_pair(i, j)
        self._check_range(j)
        return bool(self._zeros[j - 1] > self._zeros[i - 1])

    def log_magnitude(self, i: int, j: int) -> float:
        """log |corr(Y_i, Y_j)|; -inf when the correlation is exactly zero."""
        if self.is_zero(i, j):
            return -math.inf
        return float(self._log[j - 1] - self._log[i - 1])

    def sign(self, i: int, j: int) -> int:
        """Sign of the correlation (0 when it vanishes exactly)."""
        if self.is_zero(i, j):
            return 0
        return int(self._sign[j - 1] * self._sign[i - 1])

    def correlation(self, i: int, j: int) -> float:
        """Reconstructed corr(Y_i, Y_j) from the prefix representation."""
        _check_pair(i, j)
        self._check_range(j)
        if i == j:
            return 1.0
        if self._zeros[j - 1] > self._zeros[i - 1]:
            return 0.0
        sign = self._sign[j - 1] * self._sign[i - 1]
        return float(sign) * math.exp(float(self._log[j - 1] - self._log[i - 1]))

    def _check_range(self, j: int) -> None:
        if j > self.n_max:
            raise ScheduleError(f"index {j} exceeds accumulator range {self.n_max}")


def first_turn_probability_above_half(schedule: Schedule, i: int, j: int) -> Optional[int]:
    """First k in (i, j] with p_k > 1/2, or None.

    Helper for callers that must check the precondition of
    :func:`correlation_bounds` before using it.
    """
    _check_pair(i, j)
    if i == j:
        return None
    probs = schedule.probabilities(j)[i:j]  # p_{i+1} .. p_j
    bad = np.nonzero(probs > 0.5)[0]
    if bad.size == 0:
        return None
    return int(bad[0]) + i + 1


def correlation_bounds(schedule: Schedule, i: int, j: int) -> Tuple[float, float]:
    """Two-sided sandwich for the pair correlation when p_k <= 1/2 on (i, j]:

        exp(-2 S) * prod(1 - r_k)  <=  corr(Y_i, Y_j)  <=  exp(-2 S),

    with S = sum p_k and r_k = 2 p_k^2 exp(2 p_k).  Both bounds are (1, 1)
    for the empty range i == j.  Raises :class:`CorrelationBoundsError`
    naming the first offending step when some p_k > 1/2.
    """
    _check_pair(i, j)
    if i == j:
        return (1.0, 1.0)
    offender = first_turn_probability_above_half(schedule, i, j)
    if offender is not None:
        raise CorrelationBoundsError(offender, schedule.turn_probability(offender))
    probs = schedule.probabilities(j)[i:j]
    upper = math.exp(-2.0 * float(np.sum(probs)))
    r = 2.0 * probs * probs * np.exp(2.0 * probs)
    lower = upper * float(np.prod(1.0 - r))
    return (lower, upper)
