"""Influence functions with bounded-log growth for robust mean estimation.

The central object is a nondecreasing phi: R -> R squeezed between two
logarithmic envelopes,

    -log(1 - x + C_p |x|^p)  <=  phi(x)  <=  log(1 + x + C_p |x|^p),

with

    C_p = ((p-1)/p)^(p/2) * ((2-p)/(p-1))^((2-p)/2),      p in (1, 2],

and C_2 = 1/2 (the (2-p)-power factor is 0^0 := 1 at p = 2, by
continuity).  This C_p is the smallest constant for which the two
envelopes never cross, i.e. (1 + C_p u^p)^2 - u^2 >= 1 for all u >= 0,
with tangency at u* = sqrt(p(2-p))/(p-1).  In particular both envelope
arguments stay strictly positive on the whole real line, so every
function here is finite everywhere.

Two variants are provided:

* ``catoni_classic_p2`` -- the classical p = 2 form
  log(1 + x + x^2/2) for x >= 0, -log(1 - x + x^2/2) for x < 0.
  This function is odd, strictly increasing and 1-Lipschitz.
* ``tight_upper_general_p`` -- phi equal to the upper envelope for
  x >= 0 and, by odd symmetry, to the lower envelope for x < 0.  The
  tightest admissible choice: it makes downstream confidence intervals
  as narrow as the sandwich allows and is strictly increasing, so
  interval endpoints are unique roots at every sample size.

At p = 2 the two variants coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rootfind import solve_monotone

CATONI_CLASSIC_P2 = "catoni_classic_p2"
TIGHT_UPPER_GENERAL_P = "tight_upper_general_p"

_VARIANTS = (CATONI_CLASSIC_P2, TIGHT_UPPER_GENERAL_P)

#: Absolute tolerance used by invert()'s bisection.
INVERT_TOL = 1e-12


def catoni_constant(p: float) -> float:
    """C_p = ((p-1)/p)^(p/2) * ((2-p)/(p-1))^((2-p)/2), with C_2 = 1/2."""
    if not 1.0 < p <= 2.0:
        raise ValueError(f"p must lie in (1, 2], got {p}")
    if p == 2.0:
        return 0.5
    return ((p - 1.0) / p) ** (p / 2.0) * ((2.0 - p) / (p - 1.0)) ** ((2.0 - p) / 2.0)


@dataclass(frozen=True)
class InfluenceFunction:
    """A nondecreasing influence function phi with its order p and constant C_p.

    Immutable; evaluation and inversion are pure, so instances are safe to
    share across threads.
    """

    p: float
    c_p: float
    variant: str

    def __call__(self, x):
        """Evaluate phi at x (scalar or ndarray); finite for all finite x."""
        arr = np.asarray(x, dtype=np.float64)
        out = _phi(arr, self.p, self.c_p)
        if np.ndim(x) == 0:
            return float(out)
        return out

    def upper_envelope(self, x):
        """log(1 + x + C_p |x|^p); defined for every real x."""
        arr = np.asarray(x, dtype=np.float64)
        out = np.log1p(arr + self.c_p * np.abs(arr) ** self.p)
        return float(out) if np.ndim(x) == 0 else out

    def lower_envelope(self, x):
        """-log(1 - x + C_p |x|^p), or -inf where the argument is <= 0.

        With the tangency constant the argument is strictly positive
        everywhere, so the -inf branch guards only against user-supplied
        smaller constants.
        """
        arr = np.asarray(x, dtype=np.float64)
        arg = 1.0 - arr + self.c_p * np.abs(arr) ** self.p
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(arg > 0.0, -np.log(np.maximum(arg, 1e-300)), -np.inf)
        return float(out) if np.ndim(x) == 0 else out

    def invert(self, y: float, tol: float = INVERT_TOL) -> float:
        """The unique x with phi(x) = y, to absolute tolerance `tol`.

        Exists for every finite y because phi is strictly increasing and
        unbounded in both directions.  Bracket doubling from [-1, 1], then
        bisection; the p = 2 closed form -1 + sqrt(2 e^y - 1) is used only
        as a test oracle, never here.
        """
        y = float(y)
        if y == 0.0:
            return 0.0
        return solve_monotone(lambda x: float(self(x)) - y, -1.0, 1.0, tol)


def _phi(x: np.ndarray, p: float, c_p: float) -> np.ndarray:
    # log(1 + x + C|x|^p) for x >= 0, -log(1 - x + C|x|^p) for x < 0.
    # Both branches vanish at 0 and glue to an odd, strictly increasing map.
    ax = np.abs(x)
    t = ax + c_p * ax**p
    return np.sign(x) * np.log1p(t)


def make_influence(p: float, variant: str = TIGHT_UPPER_GENERAL_P) -> InfluenceFunction:
    """Build an InfluenceFunction of order p.

    `catoni_classic_p2` requires p = 2; `tight_upper_general_p` accepts any
    p in (1, 2].  Raises ValueError on a p outside (1, 2] or a variant/p
    mismatch.
    """
    if variant not in _VARIANTS:
        raise ValueError(f"unknown influence variant {variant!r}")
    c_p = catoni_constant(p)  # also validates p
    if variant == CATONI_CLASSIC_P2 and p != 2.0:
        raise ValueError(f"variant {CATONI_CLASSIC_P2} requires p = 2, got p = {p}")
    return InfluenceFunction(p=p, c_p=c_p, variant=variant)


def default_influence(p: float) -> InfluenceFunction:
    """Classic form at p = 2, tight general form otherwise (they agree at 2)."""
    variant = CATONI_CLASSIC_P2 if p == 2.0 else TIGHT_UPPER_GENERAL_P
    return make_influence(p, variant)
