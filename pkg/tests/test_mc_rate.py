import numpy as np
import pytest

from rismimo import build_scenario, ergodic_rate_mc
from rismimo import rng as rng_mod
from rismimo.channel import ChannelRealization
from rismimo.mc_rate import draw_realization, instantaneous_sinr


def _terms(sc, phases, **kw):
    ch, theta, chi = draw_realization(sc, 0, None)
    return instantaneous_sinr(ch, theta, chi, np.exp(1j * np.asarray(phases)), sc, **kw)


@pytest.fixture(scope="module")
def small():
    return build_scenario(M=16, N=16, K=3, seed=11)


def test_scalar_hand_computed():
    sc = build_scenario(M=1, N=1, K=1, hardware={"sigma2": 1e-3, "sigma2_rf": 2e-3}, tx_power=0.5)
    g, h = 0.3 - 0.4j, 1.2 + 0.5j
    ch = ChannelRealization(np.array([[h]]), np.array([[g]]), None, None, None, None)
    chi, th, phi = 0.9 * np.exp(0.2j), np.exp(-0.7j), np.exp(1.1j)
    t = instantaneous_sinr(ch, [th], [chi], [phi], sc)
    tau = sc.hardware.derived().tau
    v = g * phi * h
    u = chi * g * phi * th * h
    desired = tau**2 * 0.5 * abs(np.conj(v) * u) ** 2
    s = 0.5 * abs(u) ** 2 + 3e-3
    den = tau**2 * 3e-3 * abs(v) ** 2 + tau * (1 - tau) * s * abs(v) ** 2
    assert t.sinr[0] == pytest.approx(desired / den, rel=1e-12)


def test_global_phase_invariance(small):
    phases = rng_mod.stream(1, "phases").uniform(0, 2 * np.pi, small.N)
    a = _terms(small, phases).sinr
    b = _terms(small, phases + 1.234).sinr
    assert np.allclose(a, b, rtol=1e-12, atol=0)


def test_noise_monotone(small):
    phases = np.zeros(small.N)
    sinrs = [_terms(small.replace(sigma2=s), phases).sinr for s in (1e-14, 1e-12, 1e-10)]
    assert np.all(sinrs[0] > sinrs[1]) and np.all(sinrs[1] > sinrs[2])


def test_distortion_over_thermal_ratio(small):
    sc = small.replace(sigma2_rf=3e-13, sigma2=1e-13)
    t = _terms(sc, np.zeros(sc.N))
    assert np.allclose(t.dn / t.an, 3.0)


def test_single_user_has_no_interference():
    sc = build_scenario(M=16, N=16, K=1)
    t = _terms(sc, np.zeros(16))
    assert t.interference.shape == (1, 1) and t.interference_total[0] == 0
    assert t.sinr[0] == pytest.approx(t.desired[0] / (t.dn[0] + t.an[0] + t.qn[0]))


def test_dead_rf_chains(small):
    t = _terms(small.replace(kappa=0.0), np.zeros(small.N))
    assert np.all(t.sinr == 0)


def test_sq_mode_validation(small):
    with pytest.raises(ValueError):
        _terms(small, np.zeros(small.N), sq_mode="other")
    with pytest.raises(ValueError):
        _terms(small, np.zeros(small.N), sq_mode="marginal")


def test_single_realization_deterministic(small):
    phases = np.zeros(small.N)
    a = ergodic_rate_mc(small, phases, T=1)
    b = ergodic_rate_mc(small, phases, T=1)
    assert np.array_equal(a.per_user_rate, b.per_user_rate)
    assert np.all(np.isnan(a.mc_stderr))


def test_thread_count_does_not_change_result(small):
    phases = np.linspace(0, 3, small.N)
    a = ergodic_rate_mc(small, phases, T=300, threads=1, chunk=50)
    b = ergodic_rate_mc(small, phases, T=300, threads=3, chunk=50)
    c = ergodic_rate_mc(small, phases, T=300, threads=1, chunk=64)
    assert np.array_equal(a.per_user_rate, b.per_user_rate)
    assert np.array_equal(a.per_user_rate, c.per_user_rate)


def test_stderr_halves_with_four_times_samples(small):
    phases = np.zeros(small.N)
    e1 = ergodic_rate_mc(small, phases, T=2000).sum_stderr
    e4 = ergodic_rate_mc(small, phases, T=8000).sum_stderr
    assert e1 / e4 == pytest.approx(2.0, rel=0.2)


def test_report_fields(small):
    rep = ergodic_rate_mc(small, np.zeros(small.N), T=50)
    assert rep.method == "mc"
    assert rep.sum_rate == pytest.approx(rep.per_user_rate.sum())
    assert rep.per_user_rate.shape == (3,) and np.all(rep.per_user_rate >= 0)


def test_marginal_mode_close_to_conditional(small):
    phases = np.zeros(small.N)
    a = ergodic_rate_mc(small, phases, T=200).per_user_rate
    b = ergodic_rate_mc(small, phases, T=200, sq_mode="marginal").per_user_rate
    assert np.allclose(a, b, rtol=0.02)


def test_bad_inputs(small):
    with pytest.raises(ValueError):
        ergodic_rate_mc(small, np.zeros(4), T=10)
    with pytest.raises(ValueError):
        ergodic_rate_mc(small, np.zeros(small.N), T=0)
