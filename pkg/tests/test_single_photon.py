import math
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from fsoqkd.mathcore import DegenerateError, DomainError, NoToleranceError
from fsoqkd.single_photon import (
    DeviceParams,
    SingleProtocolKind as K,
    loss_tolerance_single,
    qber_single,
    skr_bb84,
    skr_six_state,
    skr_single,
)

from .oracles import six_state_bracket

NU = 0.64e6
T_30KM = 8.63e-4


def closed_form_tolerance_db(kind, dev):
    t = kind.beta * dev.p_nc * dev.n / ((kind.qber_threshold - dev.p_opt) * dev.eta * dev.q * dev.mu)
    return -10 * math.log10(t)


def test_kind_constants():
    assert (K.BB84.beta, K.BB84.sift_fraction, K.BB84.qber_threshold) == (0.5, 0.5, 0.11)
    assert (K.SIX_STATE.beta, K.SIX_STATE.sift_fraction, K.SIX_STATE.qber_threshold) == (2 / 3, 1 / 3, 0.126)


def test_qber_noise_free():
    assert qber_single(K.BB84, DeviceParams(p_nc=0.0, p_opt=0.001), 1.0) == 0.001


def test_qber_30km():
    dev = DeviceParams(eta=0.6, q=0.5, n=4, mu=1, p_opt=0.001, p_nc=1e-5)
    assert qber_single(K.BB84, dev, T_30KM) == pytest.approx(0.0783, abs=1e-3)
    assert qber_single(K.SIX_STATE, dev, T_30KM) == pytest.approx(0.1040, abs=1e-3)


def test_qber_zero_transmittance():
    with pytest.raises(DegenerateError):
        qber_single(K.BB84, DeviceParams(), 0.0)


def test_qber_saturates_without_raising():
    assert qber_single(K.BB84, DeviceParams(), 1e-6) > 0.5
    assert skr_single(K.BB84, 0.7, 1e-6) == 0.0


@pytest.mark.parametrize(
    "kwargs",
    [dict(eta=0), dict(eta=1.2), dict(p_nc=1.0), dict(p_opt=0.5), dict(n=0), dict(n=2.5), dict(q=0.7), dict(mu=0)],
)
def test_device_validation(kwargs):
    with pytest.raises(DomainError):
        DeviceParams(**kwargs)


def test_skr_bb84_examples():
    assert skr_bb84(0.0, 1.0, NU) == 3.2e5
    assert skr_bb84(0.11, 0.37, NU) == pytest.approx(0, abs=NU * 0.37 * 1e-3)
    assert skr_bb84(0.0783, T_30KM, NU) == pytest.approx(57, abs=3)


def test_skr_six_state_examples():
    assert skr_six_state(0.0, 1.0, NU) == pytest.approx(NU / 3, abs=1e-9)
    assert skr_six_state(0.0, 1.0, NU) == pytest.approx(2.133e5, rel=1e-3)
    assert skr_six_state(0.126, 1.0, NU) == pytest.approx(0, abs=NU * 1e-3)
    expected = NU * float(six_state_bracket(0.05)) / 3
    assert float(six_state_bracket(0.05)) == pytest.approx(0.49682, abs=1e-5)
    assert skr_six_state(0.05, 1.0, NU) == pytest.approx(expected, rel=1e-12)
    assert skr_six_state(0.05, 1.0, NU) == pytest.approx(1.0599e5, abs=2e2)


def test_skr_domain():
    with pytest.raises(DomainError):
        skr_bb84(0.5, 1.0)
    with pytest.raises(DomainError):
        skr_six_state(0.7, 1.0)


@pytest.mark.parametrize(
    "eta, q, expected",
    [(0.4, 1.0, 33.4), (0.4, 0.5, 30.4), (0.6, 0.5, 32.1)],
)
def test_loss_tolerance_bb84(eta, q, expected):
    dev = DeviceParams(eta=eta, q=q, n=4, p_nc=1e-5, p_opt=0.001)
    got = loss_tolerance_single(K.BB84, dev)
    assert got == pytest.approx(expected, abs=0.2)
    assert got == pytest.approx(closed_form_tolerance_db(K.BB84, dev), abs=0.01)


def test_loss_tolerance_interpretations_equivalent():
    a = loss_tolerance_single(K.BB84, DeviceParams(eta=0.4, q=1.0, n=4))
    b = loss_tolerance_single(K.BB84, DeviceParams(eta=0.4, q=0.5, n=2))
    assert a == pytest.approx(b, abs=0.01)


def test_six_state_36db_claim_not_reproduced():
    # the closest reading (n=2, q=1) lands near 35.7 dB
    got = loss_tolerance_single(K.SIX_STATE, DeviceParams(eta=0.4, q=1.0, n=2))
    assert got == pytest.approx(35.7, abs=0.1)
    assert got == pytest.approx(closed_form_tolerance_db(K.SIX_STATE, DeviceParams(eta=0.4, q=1.0, n=2)), abs=0.01)


def test_no_tolerance():
    with pytest.raises(NoToleranceError):
        loss_tolerance_single(K.BB84, DeviceParams(p_nc=0.1))


devices = st.builds(
    DeviceParams,
    eta=st.floats(0.05, 1.0),
    p_nc=st.floats(1e-7, 1e-2),
    p_opt=st.floats(0, 0.05),
    n=st.integers(1, 8),
    q=st.sampled_from([0.5, 1.0]),
    mu=st.floats(0.1, 2.0),
)
transmittances = st.floats(1e-6, 1.0)


@given(devices, transmittances, st.floats(1.01, 10))
def test_qber_monotone(dev, t, k):
    kind = K.BB84
    q0 = qber_single(kind, dev, t)
    assert qber_single(kind, dev, t / k) > q0
    eta_up = min(1.0, dev.eta * k)
    if eta_up > dev.eta * (1 + 1e-9):
        assert qber_single(kind, replace(dev, eta=eta_up), t) < q0
    assert qber_single(kind, replace(dev, mu=dev.mu * k), t) < q0
    assert qber_single(kind, replace(dev, p_nc=min(0.99, dev.p_nc * k)), t) > q0
    assert qber_single(kind, replace(dev, p_opt=min(0.49, dev.p_opt + 0.001)), t) > q0
    assert qber_single(kind, replace(dev, n=dev.n + 1), t) > q0
    if dev.q == 0.5:
        assert qber_single(kind, replace(dev, q=1.0), t) < q0


@given(devices, transmittances)
def test_six_state_qber_dominates(dev, t):
    assert qber_single(K.SIX_STATE, dev, t) >= qber_single(K.BB84, dev, t)


@given(st.floats(0, 0.499), st.floats(0, 1), st.floats(1, 1e7), st.floats(0.1, 10))
def test_skr_nonnegative_and_linear(q, t, nu, k):
    for fn in (skr_bb84, skr_six_state):
        v = fn(q, t, nu)
        assert v >= 0
        assert fn(q, t, nu * k) == pytest.approx(k * v, rel=1e-9, abs=1e-9)
        if t * k <= 1:
            assert fn(q, t * k, nu) == pytest.approx(k * v, rel=1e-9, abs=1e-9)


@given(st.floats(0.1101, 0.499))
def test_bb84_zero_above_threshold(q):
    assert skr_bb84(q, 1.0) == 0.0


@given(st.floats(0.1262, 0.66))
def test_six_state_zero_above_threshold(q):
    assert skr_six_state(q, 1.0) == 0.0
