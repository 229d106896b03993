"""QBER and secret key rate for prepare-and-measure BB84 and six-state."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .mathcore import (
    DegenerateError,
    DomainError,
    NoToleranceError,
    binary_entropy,
    bisect_root,
    db_to_transmittance,
)

DEFAULT_NU_S = 0.64e6


class SingleProtocolKind(Enum):
    # value: (beta, sift_fraction, qber_threshold)
    BB84 = (0.5, 0.5, 0.11)
    SIX_STATE = (2.0 / 3.0, 1.0 / 3.0, 0.126)

    @property
    def beta(self) -> float:
        return self.value[0]

    @property
    def sift_fraction(self) -> float:
        return self.value[1]

    @property
    def qber_threshold(self) -> float:
        return self.value[2]


@dataclass(frozen=True)
class DeviceParams:
    """Detector-side imperfections.

    Attributes
    ----------
    eta : detector efficiency
    p_nc : noise-count probability per gate per detector
    p_opt : optical misalignment error probability
    n : number of detectors
    q : non-interfering-path correction factor, 0.5 or 1
    mu : mean photon number per pulse
    """

    eta: float = 0.6
    p_nc: float = 1e-5
    p_opt: float = 0.001
    n: int = 4
    q: float = 0.5
    mu: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.eta <= 1.0):
            raise DomainError(f"eta must lie in (0, 1], got {self.eta}")
        if not (0.0 <= self.p_nc < 1.0):
            raise DomainError(f"p_nc must lie in [0, 1), got {self.p_nc}")
        if not (0.0 <= self.p_opt < 0.5):
            raise DomainError(f"p_opt must lie in [0, 0.5), got {self.p_opt}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be an integer >= 1, got {self.n}")
        if self.q not in (0.5, 1.0):
            raise DomainError(f"q must be 0.5 or 1, got {self.q}")
        if not self.mu > 0:
            raise DomainError(f"mu must be positive, got {self.mu}")


def qber_single(kind: SingleProtocolKind, dev: DeviceParams, t: float) -> float:
    """First-order QBER: optical error plus basis-weighted noise over detected signal.

    Values at or above 0.5 are returned unchanged; callers flag them as
    saturated (see :func:`is_saturated`).
    """
    if not (0.0 <= t <= 1.0):
        raise DomainError(f"transmittance must lie in [0, 1], got {t}")
    if t == 0.0:
        raise DegenerateError("zero transmittance: noise term diverges")
    return dev.p_opt + kind.beta * dev.p_nc * dev.n / (t * dev.eta * dev.q * dev.mu)


def is_saturated(qber: float) -> bool:
    return qber >= 0.5


def bb84_key_fraction(qber: float) -> float:
    """Signed bracket ``1 - 2h(Q)``; negative means no key."""
    return 1.0 - 2.0 * binary_entropy(qber)


def six_state_key_fraction(qber: float) -> float:
    """Signed bracket ``1 + (3Q/2)log2(Q/2) + (1-3Q/2)log2(1-3Q/2)``."""
    if not (0.0 <= qber <= 2.0 / 3.0):
        raise DomainError(f"six-state QBER must lie in [0, 2/3], got {qber}")
    a = 1.5 * qber
    s = 1.0
    if qber > 0:
        s += a * (math.log2(qber) - 1.0)
    if a < 1.0:
        s += (1.0 - a) * math.log2(1.0 - a)
    return s


def skr_bb84(qber: float, t: float, nu_s: float = DEFAULT_NU_S) -> float:
    if not (0.0 <= qber < 0.5):
        raise DomainError(f"BB84 QBER must lie in [0, 0.5), got {qber}")
    return max(0.0, 0.5 * nu_s * t * bb84_key_fraction(qber))


def skr_six_state(qber: float, t: float, nu_s: float = DEFAULT_NU_S) -> float:
    if not (0.0 <= qber < 2.0 / 3.0):
        raise DomainError(f"six-state QBER must lie in [0, 2/3), got {qber}")
    return max(0.0, nu_s * t * six_state_key_fraction(qber) / 3.0)


def key_fraction(kind: SingleProtocolKind, qber: float) -> float:
    """Signed key bracket with QBER saturated at 0.5, continuous and non-increasing in Q."""
    qber = min(qber, 0.5)
    if kind is SingleProtocolKind.BB84:
        return bb84_key_fraction(qber)
    return six_state_key_fraction(qber)


def skr_single(kind: SingleProtocolKind, qber: float, t: float, nu_s: float = DEFAULT_NU_S) -> float:
    """Key rate for either variant; saturated QBER yields zero instead of raising."""
    if is_saturated(qber):
        return 0.0
    if kind is SingleProtocolKind.BB84:
        return skr_bb84(qber, t, nu_s)
    return skr_six_state(qber, t, nu_s)


def loss_tolerance_single(
    kind: SingleProtocolKind,
    dev: DeviceParams,
    tol_db: float = 0.01,
    ceiling_db: float = 200.0,
) -> float:
    """Channel loss (dB) at which :func:`qber_single` reaches the protocol threshold.

    Raises
    ------
    NoToleranceError
        If the QBER is already at or above threshold with a lossless channel.
    """
    threshold = kind.qber_threshold

    def excess(loss_db: float) -> float:
        return qber_single(kind, dev, db_to_transmittance(loss_db)) - threshold

    if excess(0.0) >= 0:
        raise NoToleranceError(f"{kind.name} QBER exceeds {threshold} already at 0 dB")
    return bisect_root(excess, 0.0, ceiling_db, tol=tol_db)
