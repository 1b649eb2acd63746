import json
import math

import numpy as np
import pytest
import yaml
from hypothesis import given
from hypothesis import strategies as st

from rismimo import ConfigError, build_scenario
from rismimo.scenario import AngleSet, load_config, pathloss


def test_pathloss_examples():
    assert pathloss(1.0) == pytest.approx(1e-3)
    assert pathloss(10.0) == pytest.approx(10**-2.8 / 1000)
    assert pathloss(2.0, exponent=2.0) == pytest.approx(0.25e-3)


@given(st.floats(0.01, 1e4), st.floats(1.01, 10.0))
def test_pathloss_decreasing(d, factor):
    assert pathloss(d * factor) < pathloss(d)


@pytest.mark.parametrize("d", [0.0, -1.0])
def test_pathloss_rejects(d):
    with pytest.raises(ValueError):
        pathloss(d)


def test_default_geometry(default_scenario):
    sc = default_scenario
    assert (sc.M, sc.N, sc.K) == (64, 16, 4)
    assert sc.powers == pytest.approx([1.0] * 4)
    assert sc.mu == pytest.approx([10.0] * 4)
    d_ris = math.dist(sc.ris_pos, sc.bs_pos)
    assert sc.beta == pathloss(d_ris)
    for k, pos in enumerate(sc.user_positions):
        assert math.hypot(pos[0], pos[1]) <= sc.user_circle_radius
        assert pos[2] == 1.6
        assert sc.alpha[k] == pathloss(math.dist(pos, sc.ris_pos))


def test_deterministic():
    a, b = build_scenario(seed=3), build_scenario(seed=3)
    assert a == b
    assert np.array_equal(a.alpha, b.alpha)
    assert build_scenario(seed=4).user_positions != a.user_positions


def test_alpha_read_only(default_scenario):
    with pytest.raises(ValueError):
        default_scenario.alpha[0] = 1.0


def test_explicit_angles_and_positions():
    ang = {"phi_r_a": 0.1, "phi_r_e": 0.2, "phi_t_a": 0.3, "phi_t_e": 0.4,
           "phi_kr_a": [1.0, 2.0], "phi_kr_e": [3.0, 4.0]}
    sc = build_scenario(K=2, angles=ang, user_positions=[[1, 2, 1.6], [0, 0, 1.6]])
    assert sc.angles == AngleSet(0.1, 0.2, 0.3, 0.4, (1.0, 2.0), (3.0, 4.0))
    assert sc.user_positions[0] == (1.0, 2.0, 1.6)


@pytest.mark.parametrize("kw", [
    dict(M=10),
    dict(N=8),
    dict(K=0),
    dict(tx_power=-1.0),
    dict(rician_mu=-1.0),
    dict(rician_delta=-0.5),
    dict(mc_realizations=0),
    dict(K=2, user_positions=[[5.0, 100.0, 30.0], [0, 0, 1.6]]),
    dict(K=2, rician_mu=[1.0, 2.0, 3.0]),
    dict(unknown_key=1),
    dict(hardware={"kapa": 0.9}),
    dict(hardware={"kappa": 2.0}),
])
def test_invalid_configs(kw):
    with pytest.raises(ConfigError):
        build_scenario(**kw)


def test_replace_hardware_and_broadcast(default_scenario):
    sc = default_scenario.replace(kappa=0.5, tx_power=2.0, M=16)
    assert sc.hardware.kappa == 0.5 and sc.hardware.upsilon == default_scenario.hardware.upsilon
    assert sc.tx_power == (2.0,) * 4 and sc.M == 16
    assert sc.user_positions == default_scenario.user_positions


def test_to_dict_roundtrip(default_scenario):
    d = default_scenario.to_dict()
    json.dumps(d)
    assert build_scenario(d) == default_scenario


@pytest.mark.parametrize("fmt", ["yaml", "json"])
def test_load_config(tmp_path, fmt):
    raw = {"M": 16, "K": 2, "seed": 9, "hardware": {"bits": 3}}
    path = tmp_path / f"c.{fmt}"
    path.write_text(yaml.safe_dump(raw) if fmt == "yaml" else json.dumps(raw))
    sc = build_scenario(load_config(path))
    assert (sc.M, sc.K, sc.seed, sc.hardware.bits) == (16, 2, 9, 3)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(bad)
