"""Deterministic tuning sequences lambda_t and their running prefix sums.

Valid schedules must satisfy lambda_t -> 0 and sum_t lambda_t^p = infinity;
the power-law family lambda_t = c * t^(-1/p) meets both (its p-th powers
sum like the harmonic series).  Prefix sums use compensated (Kahan)
summation: downstream interval widths divide by sum(lambda_i) at n up to
10^6, where naive accumulation drifts past the 1e-12 agreement the tests
demand.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

POWER_LAW = "power_law"
DS_OPTIMAL = "ds_optimal"
CUSTOM_LIST = "custom_list"


@dataclass(frozen=True)
class LambdaSchedule:
    """A positive deterministic sequence lambda_1, lambda_2, ...

    kind:
      power_law   -- lambda_t = c * t^(-1/p)
      ds_optimal  -- lambda_t = (a / (t * b * v_p * (p-1)))^(1/p), the
                     per-time width minimizer of b*v_p*lam^(p-1) + a/(t*lam)
      custom_list -- explicit finite list of positive values
    """

    kind: str
    p: float = 2.0
    c: float = 1.0
    a: float = 0.0
    b: float = 0.0
    v_p: float = 0.0
    values: tuple[float, ...] = ()

    def at(self, t: int) -> float:
        """lambda_t for t >= 1."""
        if t < 1:
            raise ValueError(f"schedule index must be >= 1, got {t}")
        if self.kind == POWER_LAW:
            return self.c * float(t) ** (-1.0 / self.p)
        if self.kind == DS_OPTIMAL:
            return (self.a / (t * self.b * self.v_p * (self.p - 1.0))) ** (1.0 / self.p)
        if t > len(self.values):
            raise ValueError(
                f"custom_list schedule has {len(self.values)} values, index {t} requested"
            )
        return self.values[t - 1]

    def head(self, n: int) -> np.ndarray:
        """lambda_1 .. lambda_n as a float64 array."""
        if n < 0:
            raise ValueError(f"n must be >= 0, got {n}")
        if self.kind == POWER_LAW:
            return self.c * np.arange(1, n + 1, dtype=np.float64) ** (-1.0 / self.p)
        if self.kind == DS_OPTIMAL:
            t = np.arange(1, n + 1, dtype=np.float64)
            return (self.a / (t * self.b * self.v_p * (self.p - 1.0))) ** (1.0 / self.p)
        if n > len(self.values):
            raise ValueError(
                f"custom_list schedule has {len(self.values)} values, {n} requested"
            )
        return np.asarray(self.values[:n], dtype=np.float64)


def power_law(c: float = 1.0, p: float = 2.0) -> LambdaSchedule:
    if c <= 0.0:
        raise ValueError(f"scale c must be positive, got {c}")
    if not 1.0 < p <= 2.0:
        raise ValueError(f"p must lie in (1, 2], got {p}")
    return LambdaSchedule(kind=POWER_LAW, p=p, c=c)


def ds_optimal(a: float, b: float, v_p: float, p: float) -> LambdaSchedule:
    if min(a, b, v_p) <= 0.0:
        raise ValueError(f"a, b, v_p must be positive, got a={a}, b={b}, v_p={v_p}")
    if not 1.0 < p <= 2.0:
        raise ValueError(f"p must lie in (1, 2], got {p}")
    return LambdaSchedule(kind=DS_OPTIMAL, p=p, a=a, b=b, v_p=v_p)


def custom_list(values, p: float = 2.0) -> LambdaSchedule:
    vals = tuple(float(v) for v in values)
    if not vals or any(v <= 0.0 for v in vals):
        raise ValueError("custom_list schedule needs a nonempty list of positive values")
    return LambdaSchedule(kind=CUSTOM_LIST, p=p, values=vals)


def lambda_at(schedule: LambdaSchedule, t: int) -> float:
    return schedule.at(t)


def divergence_advisory(schedule: LambdaSchedule) -> str | None:
    """Advisory check of the divergence requirement (lambda_t -> 0, sum lambda_t^p = inf).

    power_law and ds_optimal satisfy it by construction; a finite custom
    list can never be checked, so a warning string is returned instead of
    an error.  Returns None when the schedule is known-good.
    """
    if schedule.kind in (POWER_LAW, DS_OPTIMAL):
        return None
    return (
        "custom_list schedule: divergence of sum(lambda^p) and lambda -> 0 "
        "cannot be verified from a finite list"
    )


class _KahanSum:
    """Compensated scalar accumulator."""

    __slots__ = ("total", "_comp")

    def __init__(self, total: float = 0.0, comp: float = 0.0):
        self.total = total
        self._comp = comp

    def add(self, x: float) -> None:
        y = x - self._comp
        t = self.total + y
        self._comp = (t - self.total) - y
        self.total = t

    def copy(self) -> "_KahanSum":
        return _KahanSum(self.total, self._comp)


@dataclass
class PrefixSums:
    """Running sums of lambda_i, lambda_i^p and lambda_i^2 over i <= n.

    A value owned and updated by a single writer; `extend` appends the next
    schedule term in O(1).  sum_lambda_sq is kept alongside for the p = 2
    diagnostics even when p != 2.
    """

    p: float
    n: int = 0
    _s1: _KahanSum = field(default_factory=_KahanSum, repr=False)
    _sp: _KahanSum = field(default_factory=_KahanSum, repr=False)
    _s2: _KahanSum = field(default_factory=_KahanSum, repr=False)

    @property
    def sum_lambda(self) -> float:
        return self._s1.total

    @property
    def sum_lambda_p(self) -> float:
        return self._sp.total

    @property
    def sum_lambda_sq(self) -> float:
        return self._s2.total

    def extend(self, schedule: LambdaSchedule) -> "PrefixSums":
        """Append lambda_{n+1}; returns self for chaining."""
        lam = schedule.at(self.n + 1)
        self.push(lam)
        return self

    def push(self, lam: float) -> None:
        """Append an explicit lambda value."""
        if lam <= 0.0:
            raise ValueError(f"lambda values must be positive, got {lam}")
        self.n += 1
        self._s1.add(lam)
        self._sp.add(lam**self.p)
        self._s2.add(lam * lam)

    def copy(self) -> "PrefixSums":
        return PrefixSums(
            p=self.p,
            n=self.n,
            _s1=self._s1.copy(),
            _sp=self._sp.copy(),
            _s2=self._s2.copy(),
        )


def extend(prefix: PrefixSums, schedule: LambdaSchedule) -> PrefixSums:
    """Functional form of PrefixSums.extend: returns an extended copy."""
    out = prefix.copy()
    out.extend(schedule)
    return out


def prefix_arrays(schedule: LambdaSchedule, n: int, p: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(lambda_i, cumsum lambda_i, cumsum lambda_i^p) for i = 1..n.

    Vectorized batch companion to PrefixSums for the experiment harness.
    """
    lam = schedule.head(n)
    return lam, np.cumsum(lam), np.cumsum(lam**p)
