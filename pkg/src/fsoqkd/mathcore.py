"""Shared numerics: dB conversions, binary entropy, root bracketing.

Probabilities and transmittances are plain floats. The ``check_*`` helpers
reject out-of-range values instead of clipping them.
"""
from __future__ import annotations

import math
from typing import Callable

from scipy import optimize


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class BracketError(ValueError):
    """The supplied interval does not bracket a sign change."""


class DegenerateError(ValueError):
    """A rate or denominator collapsed to zero (e.g. a fully opaque channel)."""


class NoToleranceError(ValueError):
    """No positive-key region exists for the requested parameters."""


def check_probability(value: float, name: str = "probability") -> float:
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
    return float(value)


def check_transmittance(value: float, name: str = "transmittance") -> float:
    return check_probability(value, name)


def db_to_transmittance(loss_db: float) -> float:
    """Convert a channel loss in dB to a linear transmittance, ``10**(-loss/10)``."""
    if loss_db < 0 or math.isnan(loss_db):
        raise DomainError(f"loss must be >= 0 dB for a passive channel, got {loss_db!r}")
    return 10.0 ** (-loss_db / 10.0)


def transmittance_to_db(t: float) -> float:
    """Inverse of :func:`db_to_transmittance`. ``T = 0`` maps to ``inf``."""
    check_transmittance(t)
    if t == 0.0:
        return math.inf
    # -0.0 for T = 1
    return abs(-10.0 * math.log10(t))


def binary_entropy(q: float) -> float:
    """Shannon entropy of a Bernoulli(q) variable in bits, with 0*log2(0) = 0."""
    check_probability(q, "q")
    if q == 0.0 or q == 1.0:
        return 0.0
    return -q * math.log2(q) - (1.0 - q) * math.log2(1.0 - q)


def mutual_information_ab(q: float) -> float:
    """Alice-Bob mutual information per sifted bit, ``1 - h(q)``."""
    return 1.0 - binary_entropy(q)


def bisect_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-9) -> float:
    """Locate a sign change of ``f`` on ``[lo, hi]`` by bisection.

    The endpoints may be given in either order. A root exactly at an endpoint
    is returned as is.

    Raises
    ------
    BracketError
        If ``f(lo)`` and ``f(hi)`` have the same sign.
    """
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol!r}")
    a, b = (lo, hi) if lo <= hi else (hi, lo)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise BracketError(f"no sign change on [{a}, {b}]: f={fa!r}, {fb!r}")
    return optimize.bisect(f, a, b, xtol=tol, rtol=4 * 2.220446049250313e-16, maxiter=400)
