"""CHSH correlation model, visibility factor and E91 key rate with the Acin bound."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .mathcore import DegenerateError, DomainError, binary_entropy, check_probability

TSIRELSON = 2.0 * math.sqrt(2.0)
# Slack for rounding when S is computed as 2*sqrt(2)*N with N == 1.
_S_EPS = 1e-12


class ArmSplit(str, Enum):
    """How a single channel-loss figure maps onto the two receiver arms."""

    SQRT_TOTAL = "sqrt_total"  # T_A = T_B = sqrt(T), so T_A*T_B = T
    PER_ARM = "per_arm"  # T_A = T_B = T


@dataclass(frozen=True)
class AnalyzerConfig:
    theta_a: tuple[float, ...] = (0.0, math.pi / 8, math.pi / 4)
    theta_b: tuple[float, ...] = (-math.pi / 8, 0.0, math.pi / 8)
    phi: float = math.pi

    def __post_init__(self):
        object.__setattr__(self, "theta_a", tuple(float(x) for x in self.theta_a))
        object.__setattr__(self, "theta_b", tuple(float(x) for x in self.theta_b))
        if len(self.theta_a) != 3 or len(self.theta_b) != 3:
            raise DomainError("analyzer angle sets must each hold three angles")


@dataclass(frozen=True)
class ArmTransmittances:
    t_a: float
    t_b: float

    def __post_init__(self):
        for name, t in (("t_a", self.t_a), ("t_b", self.t_b)):
            check_probability(t, name)

    @classmethod
    def from_total(cls, t_total: float, split: ArmSplit | str = ArmSplit.SQRT_TOTAL) -> "ArmTransmittances":
        check_probability(t_total, "t_total")
        if ArmSplit(split) is ArmSplit.SQRT_TOTAL:
            t = math.sqrt(t_total)
        else:
            t = t_total
        return cls(t, t)

    @property
    def p_s(self) -> float:
        return self.t_a * self.t_b

    @property
    def p_1(self) -> float:
        # p_HA + p_VA + p_HB + p_VB, each pair being equal halves
        return self.t_a * (1.0 - self.t_b) + self.t_b * (1.0 - self.t_a)

    @property
    def p_0(self) -> float:
        return (1.0 - self.t_a) * (1.0 - self.t_b)


@dataclass(frozen=True)
class BellDiagnostics:
    p_s: float
    p_1: float
    p_0: float
    n: float
    s_chsh: float | None = None


def correlation_coefficient(theta_a: float, theta_b: float, phi: float, n: float) -> float:
    """Polarization correlation E(theta_A, theta_B) scaled by the visibility factor."""
    check_probability(n, "N")
    return n * (
        -math.cos(2 * theta_a) * math.cos(2 * theta_b)
        + math.cos(phi) * math.sin(2 * theta_a) * math.sin(2 * theta_b)
    )


def visibility_factor(arms: ArmTransmittances, eta_t: float, p_nc: float) -> BellDiagnostics:
    """Visibility factor N from pair/single/vacuum survival probabilities and noise.

    ``eta_t`` is the total detection efficiency (detector times collection).
    """
    if not (0.0 < eta_t <= 1.0):
        raise DomainError(f"eta_t must lie in (0, 1], got {eta_t}")
    check_probability(p_nc, "p_nc")
    p_s, p_1, p_0 = arms.p_s, arms.p_1, arms.p_0
    a = eta_t + 2.0 * p_nc * (1.0 - eta_t)
    denom = p_s * a * a + 2.0 * p_1 * p_nc * a + 4.0 * p_0 * p_nc * p_nc
    if denom == 0.0:
        raise DegenerateError("visibility factor denominator vanished")
    return BellDiagnostics(p_s=p_s, p_1=p_1, p_0=p_0, n=p_s * eta_t * eta_t / denom)


def bell_parameter(cfg: AnalyzerConfig, n: float) -> float:
    """|E11 + E13 - E31 + E33| using the first and third angle of each party."""
    a1, a3 = cfg.theta_a[0], cfg.theta_a[2]
    b1, b3 = cfg.theta_b[0], cfg.theta_b[2]

    def e(x, y):
        return correlation_coefficient(x, y, cfg.phi, n)

    return abs(e(a1, b1) + e(a1, b3) - e(a3, b1) + e(a3, b3))


def qber_from_bell(s: float) -> float:
    """Invert S = 2*sqrt(2)*(1 - 2Q)."""
    if s < 0:
        raise DomainError(f"S must be >= 0, got {s}")
    if s > TSIRELSON + _S_EPS:
        raise DomainError(f"S = {s} exceeds the Tsirelson bound {TSIRELSON}")
    return max(0.0, 0.5 * (1.0 - s / TSIRELSON))


def bell_from_qber(qber: float) -> float:
    check_probability(qber, "qber")
    return TSIRELSON * (1.0 - 2.0 * qber)


def below_locality(s: float) -> bool:
    return s < 2.0


def eve_information_acin(s: float) -> float:
    """Eve's information bound ``h((1 + sqrt(S^2/4 - 1))/2)``.

    For ``S < 2`` there is no violation and the bound saturates at 1;
    use :func:`below_locality` to flag that case.
    """
    if s > TSIRELSON + _S_EPS:
        raise DomainError(f"S = {s} exceeds the Tsirelson bound {TSIRELSON}")
    if below_locality(s):
        return 1.0
    root = math.sqrt(max(0.0, s * s / 4.0 - 1.0))
    return binary_entropy(min(1.0, (1.0 + root) / 2.0))


def e91_key_fraction(qber: float, s: float) -> float:
    """Signed bracket ``1 - h(Q) - I_E(S)``."""
    return 1.0 - binary_entropy(qber) - eve_information_acin(s)


def skr_e91(qber: float, s: float, t: float, nu_s: float) -> float:
    check_probability(qber, "qber")
    if below_locality(s):
        return 0.0
    return max(0.0, nu_s * t * e91_key_fraction(qber, s) / 3.0)


def skr_e91_from_bell(s: float, t: float, nu_s: float) -> float:
    """Key rate with Q tied to S through S = 2*sqrt(2)*(1 - 2Q)."""
    return skr_e91(qber_from_bell(s), s, t, nu_s)


def bell_diagnostics(
    arms: ArmTransmittances,
    eta_t: float,
    p_nc: float,
    cfg: AnalyzerConfig | None = None,
) -> BellDiagnostics:
    cfg = cfg or AnalyzerConfig()
    partial = visibility_factor(arms, eta_t, p_nc)
    return BellDiagnostics(partial.p_s, partial.p_1, partial.p_0, partial.n, bell_parameter(cfg, partial.n))
