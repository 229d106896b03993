import math

import pytest
from hypothesis import given, strategies as st

from fsoqkd.bbm92 import (
    DEFAULT_FQ,
    EntangledSourceParams,
    ErrorCorrectionEfficiency,
    SourcePlacement,
    Visibilities,
    accidental_rate,
    bbm92_key_fraction,
    intrinsic_qber,
    loss_tolerance_bbm92,
    placement_ordering_violations,
    qber_bbm92,
    signal_rate,
    skr_bbm92,
    uncorrelated_singles,
)
from fsoqkd.mathcore import DomainError, db_to_transmittance

from .oracles import bbm92_tolerance_db

SRC = EntangledSourceParams.from_efficiencies()
ALICE, MIDDLE = SourcePlacement.AT_ALICE, SourcePlacement.IN_MIDDLE


def test_default_source():
    assert SRC.r_c == pytest.approx(82944)
    assert SRC == EntangledSourceParams()


def test_intrinsic_qber():
    assert intrinsic_qber(Visibilities(0.914, 0.914)) == pytest.approx(0.043)
    assert intrinsic_qber(Visibilities(0.95, 0.95)) == pytest.approx(0.025)
    assert intrinsic_qber(Visibilities(1, 1)) == 0.0
    with pytest.raises(DomainError):
        Visibilities(1.2, 0.9)


def test_signal_rate():
    assert signal_rate(SRC, 1.0) == pytest.approx(41472)
    assert signal_rate(SRC, 0.1) == pytest.approx(4147.2)
    assert signal_rate(SRC, 0.0) == 0.0


@pytest.mark.parametrize("placement", [ALICE, MIDDLE])
def test_accidental_rate_lossless(placement):
    assert accidental_rate(SRC, 1.0, placement, 1e-5) == pytest.approx(310.3, abs=0.5)


def test_accidental_rate_zero_window():
    src = EntangledSourceParams.from_efficiencies(tau_c=0.0)
    assert accidental_rate(src, 0.3, ALICE, 1e-5) == 0.0


def test_rc_above_singles_rejected():
    with pytest.raises(DomainError):
        EntangledSourceParams(r_1=1e5, r_2=1e5, r_c=2e5)


@given(st.floats(0.0, 1.0), st.sampled_from([ALICE, MIDDLE]))
def test_window_doubling_doubles_accidentals(t, placement):
    wide = EntangledSourceParams.from_efficiencies(tau_c=4e-9)
    assert accidental_rate(wide, t, placement, 1e-5) == pytest.approx(
        2 * accidental_rate(SRC, t, placement, 1e-5), rel=1e-12, abs=1e-300
    )


def test_qber_examples():
    assert qber_bbm92(SRC, 1.0, ALICE, 1e-5) == pytest.approx(0.0464, abs=1e-4)
    assert qber_bbm92(SRC, 0.0, ALICE, 1e-5) == 0.5


@given(st.floats(1e-12, 1.0), st.sampled_from([ALICE, MIDDLE]), st.floats(0, 1e-3))
def test_qber_bounds(t, placement, p_nc):
    q = qber_bbm92(SRC, t, placement, p_nc)
    assert SRC.q_i - 1e-12 <= q <= 0.5 + 1e-12


def test_skr_examples(golden):
    assert skr_bbm92(0.0464, 1.0, 0.64e6, DEFAULT_FQ) == pytest.approx(1.29e5, rel=5e-3)
    assert skr_bbm92(0.11, 1.0, 0.64e6, ErrorCorrectionEfficiency.constant(1.0)) == pytest.approx(0.0, abs=60)
    h = golden["binary_entropy_0.0464"]
    assert skr_bbm92(0.0464, 1.0) == pytest.approx(0.5 * 0.64e6 * (1 - 2.2 * h), rel=1e-12)
    with pytest.raises(DomainError):
        skr_bbm92(0.5, 1.0)


def test_fq_table_interpolation():
    f = ErrorCorrectionEfficiency([(0.01, 1.1), (0.05, 1.2), (0.1, 1.4)])
    assert f(0.0) == 1.1
    assert f(0.03) == pytest.approx(1.15)
    assert f(0.075) == pytest.approx(1.3)
    assert f(0.3) == 1.4
    with pytest.raises(DomainError):
        ErrorCorrectionEfficiency([(0.05, 0.9)])
    assert ErrorCorrectionEfficiency.constant(1.2) == DEFAULT_FQ


@given(st.floats(0.0, 0.5))
def test_key_fraction_decreasing_in_f(q):
    lo = bbm92_key_fraction(q, ErrorCorrectionEfficiency.constant(1.0))
    hi = bbm92_key_fraction(q, ErrorCorrectionEfficiency.constant(1.5))
    assert hi <= lo


@pytest.mark.parametrize("placement", ["alice", "middle"])
def test_loss_tolerance_matches_oracle(golden, placement):
    got = loss_tolerance_bbm92(SRC, placement, 1e-5, tol_db=1e-6)
    assert got == pytest.approx(golden["bbm92_tolerance_db"][placement], abs=1e-4)
    assert got == pytest.approx(bbm92_tolerance_db(placement), abs=1e-4)


def test_middle_to_alice_ratio():
    ratio = loss_tolerance_bbm92(SRC, MIDDLE, 1e-5) / loss_tolerance_bbm92(SRC, ALICE, 1e-5)
    assert 1.6 <= ratio <= 2.4


def test_tolerance_saturates_without_noise():
    src = EntangledSourceParams.from_efficiencies(tau_c=0.0)
    assert loss_tolerance_bbm92(src, MIDDLE, 0.0, ceiling_db=150) == 150


def test_skr_vanishes_beyond_tolerance():
    loss = loss_tolerance_bbm92(SRC, ALICE, 1e-5)
    for d in (-0.5, 0.5):
        t = db_to_transmittance(loss + d)
        r = skr_bbm92(qber_bbm92(SRC, t, ALICE, 1e-5), t)
        assert (r > 0) == (d < 0)


def test_uncorrelated_singles_placements():
    a_alice, b_alice = uncorrelated_singles(SRC, 0.01, ALICE, 1e-5)
    a_mid, b_mid = uncorrelated_singles(SRC, 0.01, MIDDLE, 1e-5)
    assert b_alice == b_mid
    assert a_alice == pytest.approx(SRC.r_1 - 0.01 * SRC.r_c)
    assert a_mid == pytest.approx(6.4 + 0.01 * (SRC.r_1 - SRC.r_c))


def test_placement_ordering_is_reversed_by_closed_forms():
    # with a source in the middle both arms are attenuated, so the closed
    # forms give fewer accidentals there than with the source at Alice
    losses = [0.5 * i for i in range(91)]
    bad = placement_ordering_violations(SRC, 1e-5, losses)
    assert bad == losses[1:]
    for loss in (1, 10, 30):
        t = db_to_transmittance(loss)
        assert qber_bbm92(SRC, t, MIDDLE, 1e-5) < qber_bbm92(SRC, t, ALICE, 1e-5)


def test_middle_qber_has_interior_minimum():
    qs = [qber_bbm92(SRC, db_to_transmittance(x), MIDDLE, 1e-5) for x in range(0, 80)]
    i = qs.index(min(qs))
    assert 0 < i < 79
    # minimum sits where T^2 (r1-rc)(r2-rc) balances rbg^2
    t_min = 6.4 / (SRC.r_1 - SRC.r_c)
    assert abs(i - (-10 * math.log10(t_min))) <= 1
