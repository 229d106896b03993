"""Coincidence-rate model for BBM92 with the source at Alice or in the middle."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .mathcore import (
    DegenerateError,
    DomainError,
    NoToleranceError,
    binary_entropy,
    bisect_root,
    check_probability,
    db_to_transmittance,
)


class SourcePlacement(str, Enum):
    AT_ALICE = "alice"
    IN_MIDDLE = "middle"


@dataclass(frozen=True)
class EntangledSourceParams:
    """Pair source and coincidence-counting parameters.

    Rates in counts/s, ``tau_c`` in seconds. ``eta`` is the detector
    efficiency and ``eta_c`` the fibre collection efficiency.
    """

    r_1: float = 0.64e6
    r_2: float = 0.64e6
    r_c: float = 0.6**2 * 0.6**2 * 0.64e6
    tau_c: float = 2e-9
    q_i: float = 0.043
    nu_s: float = 0.64e6
    eta: float = 0.6
    eta_c: float = 0.6

    def __post_init__(self):
        if self.r_1 < 0 or self.r_2 < 0 or self.r_c < 0 or self.nu_s < 0:
            raise DomainError("rates must be non-negative")
        if self.r_c > min(self.r_1, self.r_2):
            raise DomainError(f"coincidence rate {self.r_c} exceeds singles rates {self.r_1}, {self.r_2}")
        if self.tau_c < 0:
            raise DomainError(f"tau_c must be >= 0, got {self.tau_c}")
        if not (0.0 <= self.q_i < 0.5):
            raise DomainError(f"q_i must lie in [0, 0.5), got {self.q_i}")
        if not (0.0 < self.eta <= 1.0) or not (0.0 < self.eta_c <= 1.0):
            raise DomainError(f"efficiencies must lie in (0, 1], got eta={self.eta}, eta_c={self.eta_c}")

    @classmethod
    def from_efficiencies(
        cls,
        eta: float = 0.6,
        eta_c: float = 0.6,
        nu_s: float = 0.64e6,
        tau_c: float = 2e-9,
        q_i: float = 0.043,
    ) -> "EntangledSourceParams":
        """Singles rates equal the brightness and ``r_c = eta^2 eta_c^2 r_1``."""
        return cls(
            r_1=nu_s,
            r_2=nu_s,
            r_c=eta**2 * eta_c**2 * nu_s,
            tau_c=tau_c,
            q_i=q_i,
            nu_s=nu_s,
            eta=eta,
            eta_c=eta_c,
        )


@dataclass(frozen=True)
class Visibilities:
    v_hv: float
    v_pm45: float

    def __post_init__(self):
        check_probability(self.v_hv, "V_HV")
        check_probability(self.v_pm45, "V_pm45")


def intrinsic_qber(v: Visibilities) -> float:
    v_tot = (v.v_hv + v.v_pm45) / 2.0
    return (1.0 - v_tot) / 2.0


class ErrorCorrectionEfficiency:
    """Piecewise-linear f(Q) through (Q, f) knots, held constant outside the knots."""

    def __init__(self, table: Sequence[tuple[float, float]] = ((0.0, 1.2),)):
        if not table:
            raise DomainError("f(Q) table needs at least one (Q, f) pair")
        pairs = sorted((float(q), float(f)) for q, f in table)
        for q, f in pairs:
            check_probability(q, "f(Q) knot")
            if f < 1.0:
                raise DomainError(f"error-correction inefficiency must be >= 1, got {f}")
        self.table = tuple(pairs)
        self._q = np.array([p[0] for p in pairs])
        self._f = np.array([p[1] for p in pairs])

    @classmethod
    def constant(cls, f: float) -> "ErrorCorrectionEfficiency":
        return cls(((0.0, f),))

    def __call__(self, qber: float) -> float:
        return float(np.interp(qber, self._q, self._f))

    def __eq__(self, other):
        return isinstance(other, ErrorCorrectionEfficiency) and self.table == other.table

    def __hash__(self):
        return hash(self.table)

    def __repr__(self):
        return f"ErrorCorrectionEfficiency({list(self.table)!r})"


DEFAULT_FQ = ErrorCorrectionEfficiency.constant(1.2)


def signal_rate(src: EntangledSourceParams, t: float) -> float:
    """Sifted signal coincidences: half of the detected coincidence rate."""
    check_probability(t, "T")
    return 0.5 * src.r_c * t


def background_rates(src: EntangledSourceParams, p_nc: float) -> tuple[float, float]:
    check_probability(p_nc, "p_nc")
    return p_nc * src.r_1, p_nc * src.r_2


def uncorrelated_singles(
    src: EntangledSourceParams,
    t: float,
    placement: SourcePlacement | str,
    p_nc: float,
) -> tuple[float, float]:
    """Rates of the two click streams that produce accidental coincidences.

    The accidental rate is ``0.5 * a * b * tau_c`` for the returned ``(a, b)``.
    """
    check_probability(t, "T")
    rbg_a, rbg_b = background_rates(src, p_nc)
    b = rbg_b + t * (src.r_2 - src.r_c)
    if SourcePlacement(placement) is SourcePlacement.AT_ALICE:
        a = src.r_1 - t * src.r_c
    else:
        a = rbg_a + t * (src.r_1 - src.r_c)
    if a < 0 or b < 0:
        raise DomainError(f"negative uncorrelated rate ({a}, {b}): r_c inconsistent with singles rates")
    return a, b


def accidental_rate(
    src: EntangledSourceParams,
    t: float,
    placement: SourcePlacement | str,
    p_nc: float,
) -> float:
    a, b = uncorrelated_singles(src, t, placement, p_nc)
    return 0.5 * a * b * src.tau_c


def qber_bbm92(
    src: EntangledSourceParams,
    t: float,
    placement: SourcePlacement | str,
    p_nc: float,
) -> float:
    """Total QBER: intrinsic error on signal coincidences, 1/2 on accidentals."""
    r_sig = signal_rate(src, t)
    r_a = accidental_rate(src, t, placement, p_nc)
    total = r_sig + r_a
    if total == 0.0:
        raise DegenerateError("no signal and no accidental coincidences")
    return (src.q_i * r_sig + 0.5 * r_a) / total


def bbm92_key_fraction(qber: float, f: Callable[[float], float] = DEFAULT_FQ) -> float:
    """Signed bracket ``1 - f(Q)h(Q) - h(Q)``."""
    h = binary_entropy(min(qber, 0.5))
    return 1.0 - f(qber) * h - h


def skr_bbm92(
    qber: float,
    t: float,
    nu_s: float = 0.64e6,
    f: Callable[[float], float] = DEFAULT_FQ,
) -> float:
    if not (0.0 <= qber < 0.5):
        raise DomainError(f"BBM92 QBER must lie in [0, 0.5), got {qber}")
    check_probability(t, "T")
    return max(0.0, 0.5 * nu_s * t * bbm92_key_fraction(qber, f))


def loss_tolerance_bbm92(
    src: EntangledSourceParams,
    placement: SourcePlacement | str,
    p_nc: float,
    f: Callable[[float], float] = DEFAULT_FQ,
    tol_db: float = 0.01,
    ceiling_db: float = 200.0,
) -> float:
    """Loss (dB) at which the BBM92 key rate reaches zero.

    Returns ``ceiling_db`` when the key survives the whole range (e.g. no
    background and a vanishing window); callers treat that as saturation.
    """

    def frac(loss_db: float) -> float:
        t = db_to_transmittance(loss_db)
        return bbm92_key_fraction(qber_bbm92(src, t, placement, p_nc), f)

    if frac(0.0) <= 0:
        raise NoToleranceError("BBM92 key rate is zero already at 0 dB")
    if frac(ceiling_db) > 0:
        return ceiling_db
    return bisect_root(frac, 0.0, ceiling_db, tol=tol_db)


def placement_ordering_violations(
    src: EntangledSourceParams,
    p_nc: float,
    losses_db: Sequence[float],
) -> list[float]:
    """Losses where the source-in-middle QBER falls below the Alice-side QBER.

    The expected physical ordering is middle >= Alice; the closed forms do not
    guarantee it, so this lists the offending grid points.
    """
    out = []
    for loss in losses_db:
        t = db_to_transmittance(loss)
        if t >= 1.0 or t <= 0.0:
            continue
        q_mid = qber_bbm92(src, t, SourcePlacement.IN_MIDDLE, p_nc)
        q_alice = qber_bbm92(src, t, SourcePlacement.AT_ALICE, p_nc)
        if q_mid < q_alice - 1e-15:
            out.append(float(loss))
    return out

