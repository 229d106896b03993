import math

import pytest
from hypothesis import given, settings, strategies as st

from fsoqkd.bbm92 import ErrorCorrectionEfficiency
from fsoqkd.channel import AlphaUnit, ChannelParams, reproduce_table1
from fsoqkd.config import (
    CONFIG_ENV_VAR,
    ConfigError,
    RunConfig,
    load_config,
    parse_config,
    render_config,
    with_overrides,
)
from fsoqkd.e91 import ArmSplit


def test_empty_document_gives_defaults():
    cfg = parse_config("")
    assert cfg == RunConfig()
    d, s = cfg.device, cfg.source
    assert (d.eta, d.p_nc, d.p_opt, d.q, d.n, d.mu) == (0.6, 1e-5, 0.001, 0.5, 4, 1.0)
    assert (s.eta_c, s.nu_s, s.tau_c, s.q_i) == (0.6, 0.64e6, 2e-9, 0.043)
    assert cfg.alpha_unit is AlphaUnit.NATURAL
    assert cfg.arm_split is ArmSplit.SQRT_TOTAL


def test_range_error_has_line():
    with pytest.raises(ConfigError) as exc:
        parse_config("# comment\n\n[device]\neta = 1.5\n")
    assert exc.value.line == 4
    assert "line 4" in str(exc.value)


@pytest.mark.parametrize(
    "text, line",
    [
        ("[device]\nbogus = 1\n", 2),
        ("[channel]\neta = 0.5\n", 2),
        ("eta = 0.5\n[device]\neta = 0.4\n", 3),
        ("[device]\neta = abc\n", 2),
        ("[mystery]\nx = 1\n", 1),
        ("n_detectors = 2.5\n", 1),
        ("fq_table = 0.1:0.8\n", 1),
    ],
)
def test_rejections_carry_location(text, line):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.line == line


def test_alpha_unit_db_reading():
    cfg = parse_config("alpha_unit = db\n")
    rows = reproduce_table1(cfg.alpha_unit)
    assert rows[2].computed_db == pytest.approx(20.62, abs=0.01)
    assert reproduce_table1(AlphaUnit.NATURAL)[2].computed_db == pytest.approx(30.64, abs=0.01)


def test_keys_without_headers():
    cfg = parse_config("eta = 0.4\nlength_m = 500\nd_r_mm = 12\nfq_table = 0.0:1.1, 0.1:1.3\n")
    assert cfg.device.eta == 0.4
    assert cfg.channel == ChannelParams(d_r=12, length=500)
    assert cfg.fq_table(0.05) == pytest.approx(1.2)
    # coincidence rate follows the device efficiency
    assert cfg.source.r_c == pytest.approx(0.4**2 * 0.6**2 * 0.64e6)


def test_explicit_rc_kept():
    assert parse_config("[source]\nr_c = 5000\n").source.r_c == 5000


def test_analyzer_angles():
    cfg = parse_config("[analyzer]\ntheta_a = 0, 0.3, 0.6\nphi = 0\n")
    assert cfg.analyzer.theta_a == (0.0, 0.3, 0.6)
    assert cfg.analyzer.phi == 0.0


pos = st.floats(0.5, 50)
unit = st.floats(0.01, 1.0)


@settings(max_examples=60, deadline=None)
@given(
    d_t=pos,
    d_r=pos,
    div=st.floats(0.001, 1.0),
    length=st.floats(1.0, 1e5),
    eta=unit,
    p_nc=st.floats(0, 1e-3),
    n=st.integers(1, 8),
    eta_c=unit,
    tau=st.floats(0, 1e-8),
    unit_=st.sampled_from(list(AlphaUnit)),
    split=st.sampled_from(list(ArmSplit)),
    fq=st.lists(st.tuples(st.floats(0, 0.5), st.floats(1.0, 2.0)), min_size=1, max_size=4, unique_by=lambda x: x[0]),
    angle=st.floats(-math.pi, math.pi),
    out=st.sampled_from([None, "out.csv", "runs/x.csv"]),
)
def test_render_parse_round_trip(d_t, d_r, div, length, eta, p_nc, n, eta_c, tau, unit_, split, fq, angle, out):
    cfg = with_overrides(
        RunConfig(),
        d_t_mm=d_t,
        d_r_mm=d_r,
        divergence_mrad=div,
        length_m=length,
        eta=eta,
        p_nc=p_nc,
        n_detectors=n,
        eta_c=eta_c,
        tau_c=tau,
        alpha_unit=unit_,
        arm_split=split,
        phi=angle,
        output_path=out,
    )
    cfg = with_overrides(cfg, fq_table=ErrorCorrectionEfficiency(fq))
    assert parse_config(render_config(cfg)) == cfg


def test_overrides_rederive_rc():
    cfg = with_overrides(RunConfig(), eta=0.5)
    assert cfg.source.eta == 0.5
    assert cfg.source.r_c == pytest.approx(0.5**2 * 0.36 * 0.64e6)
    with pytest.raises(ConfigError):
        with_overrides(RunConfig(), eta=2.0)
    with pytest.raises(ConfigError):
        with_overrides(RunConfig(), warp=9)


def test_load_config_sources(tmp_path, monkeypatch):
    monkeypatch.delenv(CONFIG_ENV_VAR, raising=False)
    assert load_config() == RunConfig()
    f = tmp_path / "run.ini"
    f.write_text("[device]\np_nc = 1e-6\n")
    assert load_config(f).device.p_nc == 1e-6
    monkeypatch.setenv(CONFIG_ENV_VAR, str(f))
    assert load_config().device.p_nc == 1e-6
