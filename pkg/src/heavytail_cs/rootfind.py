"""Scalar root finding for strictly monotone functions.

Bracket expansion by geometric doubling around an initial guess interval,
followed by plain bisection.  Bisection is preferred over faster schemes
because every caller in this package has a strictly monotone objective and
wants a hard guarantee of termination with a sign-change bracket.
"""

from __future__ import annotations

from typing import Callable


class BracketError(RuntimeError):
    """No sign change found after the allowed number of doublings."""


def expand_bracket(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    max_doublings: int = 200,
) -> tuple[float, float, float, float]:
    """Grow [lo, hi] symmetrically until f changes sign across it.

    Returns (lo, hi, f(lo), f(hi)) with f(lo) * f(hi) <= 0.  Each step
    doubles the interval radius.  Raises BracketError after
    `max_doublings` failed expansions (unreachable for the monotone,
    unbounded objectives used in this package).
    """
    if not lo < hi:
        raise ValueError(f"invalid initial bracket [{lo}, {hi}]")
    flo = f(lo)
    fhi = f(hi)
    width = hi - lo
    for _ in range(max_doublings):
        if flo == 0.0 or fhi == 0.0 or (flo > 0.0) != (fhi > 0.0):
            return lo, hi, flo, fhi
        lo -= width
        hi += width
        width = hi - lo
        flo = f(lo)
        fhi = f(hi)
    raise BracketError(
        f"no sign change in [{lo}, {hi}] after {max_doublings} doublings: "
        f"f(lo)={flo}, f(hi)={fhi}"
    )


def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float,
    flo: float | None = None,
    fhi: float | None = None,
    max_iter: int = 200,
) -> float:
    """Bisect a sign-change bracket down to absolute width `xtol`.

    `flo`/`fhi` may be passed to reuse endpoint evaluations from
    expand_bracket.  Stops early if the midpoint stops moving in floating
    point.  Returns the bracket midpoint.
    """
    if xtol <= 0.0:
        raise ValueError(f"xtol must be positive, got {xtol}")
    flo = f(lo) if flo is None else flo
    fhi = f(hi) if fhi is None else fhi
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0.0) == (fhi > 0.0):
        raise ValueError(f"no sign change: f({lo})={flo}, f({hi})={fhi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid <= lo or mid >= hi:
            break
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0.0) == (flo > 0.0):
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    return 0.5 * (lo + hi)


def solve_monotone(
    f: Callable[[float], float],
    guess_lo: float,
    guess_hi: float,
    xtol: float,
    max_doublings: int = 200,
) -> float:
    """Expand a guess interval to a bracket, then bisect to `xtol`."""
    lo, hi, flo, fhi = expand_bracket(f, guess_lo, guess_hi, max_doublings)
    return bisect(f, lo, hi, xtol, flo, fhi)
