import numpy as np
import pytest

from rismimo import build_scenario
from rismimo import rng as rng_mod
from rismimo.channel import los_components, sample_channels


def test_los_structure(default_scenario):
    H_bar, G_bar = los_components(default_scenario)
    assert H_bar.shape == (16, 4) and G_bar.shape == (64, 16)
    assert np.allclose(np.abs(H_bar), 1) and np.allclose(np.abs(G_bar), 1)
    assert G_bar[0, 0] == 1
    s = np.linalg.svd(G_bar, compute_uv=False)
    assert s[0] == pytest.approx(np.sqrt(64 * 16))
    assert s[1] / s[0] < 1e-12


def test_pure_los_limit():
    sc = build_scenario(rician_mu=1e12, rician_delta=1e12)
    ch = sample_channels(sc, rng_mod.stream(0, "channel"))
    dev_h = np.abs(ch.H / np.sqrt(sc.alpha) - ch.H_bar).max()
    dev_g = np.abs(ch.G / np.sqrt(sc.beta) - ch.G_bar).max()
    assert dev_h < 1e-5 and dev_g < 1e-5


def test_rayleigh_second_moment():
    sc = build_scenario(M=4, N=4, rician_mu=0.0, rician_delta=0.0)
    ch = sample_channels(sc, rng_mod.stream(1, "channel"), batch=25000)
    h = np.abs(ch.H) ** 2 / sc.alpha
    g = np.abs(ch.G) ** 2 / sc.beta
    for x in (h, g):
        x = x.ravel()
        assert abs(x.mean() - 1) < 3 * x.std() / np.sqrt(x.size)


def test_norm_expectation(default_scenario):
    sc = default_scenario
    ch = sample_channels(sc, rng_mod.stream(2, "channel"), batch=20000)
    norms = (np.abs(ch.H) ** 2).sum(axis=1)  # (batch, K)
    expected = sc.alpha * sc.N
    se = norms.std(axis=0) / np.sqrt(norms.shape[0])
    assert np.all(np.abs(norms.mean(axis=0) - expected) < 3 * se)


def test_scattered_parts_standard(default_scenario):
    ch = sample_channels(default_scenario, rng_mod.stream(3, "channel"), batch=2000)
    for x in (ch.H_tilde, ch.G_tilde):
        assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, abs=0.02)
        assert abs(np.mean(x)) < 0.02
        assert abs(np.mean(x**2)) < 0.02  # circular symmetry


def test_reproducible_streams(default_scenario):
    a = sample_channels(default_scenario, rng_mod.stream(0, "channel", 5), index=5)
    b = sample_channels(default_scenario, rng_mod.stream(0, "channel", 5), index=5)
    c = sample_channels(default_scenario, rng_mod.stream(0, "channel", 6), index=6)
    assert np.array_equal(a.H, b.H) and np.array_equal(a.G, b.G)
    assert not np.array_equal(a.H, c.H)
    assert a.realization_index == 5


def test_stream_validation():
    with pytest.raises(KeyError):
        rng_mod.stream(0, "nope")
    with pytest.raises(ValueError):
        rng_mod.stream(-1, "channel")
