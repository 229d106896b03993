"""Seeded Monte Carlo detection-event simulator.

Gives an empirical QBER (errors over sifted events) and accidental
coincidence rates to cross-check the closed forms in ``single_photon`` and
``bbm92``.

Random streams come from numpy's Philox counter-based generator. Work is cut
into fixed-size partitions and partition ``i`` draws from
``Philox(SeedSequence(seed, spawn_key=(i,)))``, so results depend only on
``(seed, config)`` and never on the number of workers.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bbm92 import EntangledSourceParams, SourcePlacement, uncorrelated_singles
from .mathcore import DomainError
from .single_photon import DeviceParams, SingleProtocolKind

PRNG_ALGORITHM = "Philox4x64-10"
PULSES_PER_PARTITION = 1 << 20
SECONDS_PER_PARTITION = 0.25


class InsufficientStatisticsError(RuntimeError):
    pass


class PileUpWarning(UserWarning):
    pass


@dataclass(frozen=True)
class SinglePhotonScenario:
    kind: SingleProtocolKind
    dev: DeviceParams
    t: float
    # False: noise clicks only matter on pulses without a signal click.
    # True: a noise click coinciding with a signal click randomizes the bit.
    noise_overrides_signal: bool = False


@dataclass(frozen=True)
class Bbm92Scenario:
    src: EntangledSourceParams
    placement: SourcePlacement
    t: float
    p_nc: float


@dataclass(frozen=True)
class McConfig:
    trials: int
    seed: int
    scenario: SinglePhotonScenario | Bbm92Scenario

    def __post_init__(self):
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")


@dataclass(frozen=True)
class McEstimate:
    qber_hat: float
    sifted_count: int
    error_count: int
    stderr: float


@dataclass(frozen=True)
class RateEstimate:
    rate: float
    count: int
    duration: float
    stderr: float


def _rng(seed: int, partition: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(partition,))
    return np.random.Generator(np.random.Philox(ss))


def _partitions(total: int, size: int) -> list[tuple[int, int]]:
    return [(i, min(size, total - start)) for i, start in enumerate(range(0, total, size))]


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _single_photon_partition(sc: SinglePhotonScenario, seed: int, index: int, n: int) -> tuple[int, int]:
    dev = sc.dev
    rng = _rng(seed, index)
    p_signal = sc.t * dev.eta * dev.q * dev.mu
    p_noise = 1.0 - (1.0 - dev.p_nc) ** dev.n

    signal = rng.random(n) < p_signal
    noise = rng.random(n) < p_noise
    clicked = signal | noise
    m = int(np.count_nonzero(clicked))
    if m == 0:
        return 0, 0
    sig = signal[clicked]
    noi = noise[clicked]
    # remaining draws only for pulses that produced a click
    flip = rng.random(m) < dev.p_opt
    coin = rng.random(m) < 0.5
    kept = rng.random(m) < sc.kind.sift_fraction

    if sc.noise_overrides_signal:
        randomized = noi
    else:
        randomized = noi & ~sig
    error = np.where(randomized, coin, flip)
    return int(np.count_nonzero(kept)), int(np.count_nonzero(error & kept))


def simulate_single_photon(cfg: McConfig, workers: int = 1) -> McEstimate:
    """Per-pulse event model for BB84 / six-state.

    A signal click occurs with probability ``T*eta*q*mu`` and is flipped with
    probability ``p_opt``. Each of the ``n`` detectors fires a noise count
    with probability ``p_nc``; noise-only clicks carry a uniformly random
    bit. Basis sifting keeps each click with the protocol's sift fraction.
    """
    sc = cfg.scenario
    if not isinstance(sc, SinglePhotonScenario):
        raise TypeError("simulate_single_photon needs a SinglePhotonScenario")
    p_signal = sc.t * sc.dev.eta * sc.dev.q * sc.dev.mu
    if not (0.0 <= p_signal <= 1.0):
        raise DomainError(f"signal click probability {p_signal} outside [0, 1]; model needs mu*T*eta*q <= 1")

    parts = _partitions(cfg.trials, PULSES_PER_PARTITION)
    counts = _map(lambda p: _single_photon_partition(sc, cfg.seed, *p), parts, workers)
    sifted = sum(c[0] for c in counts)
    errors = sum(c[1] for c in counts)
    if sifted == 0:
        raise InsufficientStatisticsError("no sifted events; increase trials")
    q = errors / sifted
    return McEstimate(qber_hat=q, sifted_count=sifted, error_count=errors, stderr=math.sqrt(q * (1 - q) / sifted))


def _poisson_times(rng: np.random.Generator, rate: float, duration: float) -> np.ndarray:
    k = rng.poisson(rate * duration)
    return np.sort(rng.random(k) * duration)


def _count_coincidences(ta: np.ndarray, tb: np.ndarray, tau: float) -> int:
    # pairs with |t_a - t_b| < tau / 2, i.e. a window of total width tau
    lo = np.searchsorted(tb, ta - tau / 2, side="right")
    hi = np.searchsorted(tb, ta + tau / 2, side="left")
    return int(np.sum(hi - lo))


def _coincidence_partition(rate_a, rate_b, tau, seed, index, duration, sift):
    rng = _rng(seed, index)
    ta = _poisson_times(rng, rate_a, duration)
    tb = _poisson_times(rng, rate_b, duration)
    c = _count_coincidences(ta, tb, tau)
    if sift < 1.0:
        c = int(rng.binomial(c, sift))
    return c


def poisson_coincidences(
    rate_a: float,
    rate_b: float,
    tau: float,
    duration: float,
    seed: int,
    sift: float = 1.0,
    workers: int = 1,
) -> RateEstimate:
    """Count coincidences between two independent Poisson click streams.

    The expected rate is ``sift * rate_a * rate_b * tau``. Streams are
    simulated in independent segments; pairs straddling a segment boundary
    are dropped, a relative bias of order ``tau / segment``.
    """
    if rate_a < 0 or rate_b < 0 or tau < 0 or duration <= 0:
        raise DomainError("rates and window must be >= 0 and duration > 0")
    if max(rate_a, rate_b) * tau >= 1.0:
        warnings.warn(
            f"coincidence window {tau} s exceeds the mean inter-click interval; pile-up regime",
            PileUpWarning,
            stacklevel=2,
        )
    if tau == 0.0:
        return RateEstimate(rate=0.0, count=0, duration=duration, stderr=0.0)

    n_full = int(duration // SECONDS_PER_PARTITION)
    spans = [SECONDS_PER_PARTITION] * n_full
    rest = duration - n_full * SECONDS_PER_PARTITION
    if rest > 1e-12 or not spans:
        spans.append(rest if rest > 1e-12 else duration)
    jobs = list(enumerate(spans))
    counts = _map(
        lambda j: _coincidence_partition(rate_a, rate_b, tau, seed, j[0], j[1], sift),
        jobs,
        workers,
    )
    total = sum(counts)
    return RateEstimate(rate=total / duration, count=total, duration=duration, stderr=math.sqrt(total) / duration)


def simulate_bbm92_accidentals(cfg: McConfig, workers: int = 1) -> RateEstimate:
    """Accidental coincidence rate from simulated uncorrelated click streams.

    ``cfg.trials`` is the number of emitted pairs; the virtual measurement
    time is ``trials / nu_s``. Each coincidence survives basis sifting with
    probability 1/2.
    """
    sc = cfg.scenario
    if not isinstance(sc, Bbm92Scenario):
        raise TypeError("simulate_bbm92_accidentals needs a Bbm92Scenario")
    if sc.src.nu_s <= 0:
        raise DomainError("source brightness must be positive")
    a, b = uncorrelated_singles(sc.src, sc.t, sc.placement, sc.p_nc)
    duration = cfg.trials / sc.src.nu_s
    return poisson_coincidences(a, b, sc.src.tau_c, duration, cfg.seed, sift=0.5, workers=workers)
