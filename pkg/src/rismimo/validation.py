"""Monte Carlo oracle for the closed-form expectations.

Every closed-form quantity is compared against a sample mean of the
random variable it claims to be the expectation of:

* ``xi_k``      E|v_k^H u_k|^2
* ``gamma_ki``  E|v_k^H u_i|^2
* ``varpi_k``   E|[G Phi h_k]_m|^2
* ``zeta``      E|[chi G Phi Theta H P x]_m|^2

with ``v_k = G Phi h_k`` and ``u_i = chi G Phi Theta h_i``. Samples are
built from the channel definition directly; phase noise comes from
numpy's own von Mises sampler so the oracle shares no sampling code with
the simulator. The expectation over the unit-power data symbols ``x`` is
taken analytically, and per-antenna quantities are averaged over the M
identically distributed antennas within each sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng as rng_mod
from .channel import los_components
from .closed_form import closed_form_terms
from .scenario import ScenarioConfig, build_scenario


@dataclass(frozen=True)
class OracleRow:
    """One closed-form value against its Monte Carlo estimate."""

    config: int
    quantity: str
    k: int
    i: int
    closed: float
    mc: float
    stderr: float

    @property
    def z(self) -> float:
        return (self.closed - self.mc) / self.stderr


def _crandn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def oracle_moments(scenario: ScenarioConfig, phases, samples: int = 10**6, batch: int = 20_000,
                   seed: int = 0) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Sample means and standard errors of the four defining expectations.

    Returns a mapping from ``"xi"``, ``"gamma"``, ``"varpi"``, ``"zeta"`` to
    ``(mean, stderr)``; ``gamma`` entries are K x K (diagonal unused).
    """
    M, N, K = scenario.M, scenario.N, scenario.K
    hw = scenario.hardware
    H_bar, G_bar = los_components(scenario)
    mu, delta = scenario.mu, scenario.rician_delta
    sa, sb = np.sqrt(scenario.alpha), math.sqrt(scenario.beta)
    phi = np.exp(1j * np.asarray(phases, dtype=float))
    p = scenario.powers
    rng = rng_mod.stream(seed, "oracle")

    acc = {name: np.zeros((2,) + shape) for name, shape in
           (("X", (K, K)), ("varpi", (K,)), ("zeta", ()))}
    done = 0
    while done < samples:
        b = min(batch, samples - done)
        H = sa * (np.sqrt(mu / (mu + 1)) * H_bar + np.sqrt(1 / (mu + 1)) * _crandn(rng, (b, N, K)))
        G = sb * (math.sqrt(delta / (delta + 1)) * G_bar + math.sqrt(1 / (delta + 1)) * _crandn(rng, (b, M, N)))
        if hw.upsilon > 0:
            eps = rng.vonmises(0.0, hw.upsilon, (b, N))
        else:
            eps = rng.uniform(0.0, 2 * np.pi, (b, N))
        chi = hw.kappa * np.exp(1j * rng.uniform(-hw.eta, hw.eta, (b, M)))
        V = np.einsum("bmn,n,bnk->bmk", G, phi, H)
        U = chi[:, :, None] * np.einsum("bmn,bn,bnk->bmk", G, phi * np.exp(1j * eps), H)
        X = np.abs(np.einsum("bmk,bmi->bki", V.conj(), U)) ** 2
        vals = {
            "X": X,
            "varpi": (np.abs(V) ** 2).mean(axis=1),
            "zeta": (np.abs(U) ** 2 @ p).mean(axis=1),
        }
        for name, v in vals.items():
            acc[name][0] += v.sum(axis=0)
            acc[name][1] += (v**2).sum(axis=0)
        done += b

    out = {}
    for name, (s1, s2) in acc.items():
        mean = s1 / samples
        var = np.maximum(s2 / samples - mean**2, 0.0) * samples / (samples - 1)
        out[name] = (mean, np.sqrt(var / samples))
    X_mean, X_err = out.pop("X")
    out["xi"] = (np.diagonal(X_mean).copy(), np.diagonal(X_err).copy())
    out["gamma"] = (X_mean, X_err)
    return out


def compare(scenario: ScenarioConfig, phases, samples: int = 10**6, seed: int = 0, config: int = 0,
            coefficients: str = "corrected") -> list[OracleRow]:
    """Oracle rows for every closed-form quantity of one scenario."""
    terms = closed_form_terms(scenario, phases, coefficients)
    mc = oracle_moments(scenario, phases, samples=samples, seed=seed)
    rows = []
    K = scenario.K
    for k in range(K):
        rows.append(OracleRow(config, "xi", k, k, float(terms.xi[k]), *map(float, (mc["xi"][0][k], mc["xi"][1][k]))))
    for k in range(K):
        for i in range(K):
            if i != k:
                rows.append(OracleRow(config, "gamma", k, i, float(terms.gamma[k, i]),
                                      float(mc["gamma"][0][k, i]), float(mc["gamma"][1][k, i])))
    for k in range(K):
        rows.append(OracleRow(config, "varpi", k, k, float(terms.varpi[k]),
                              float(mc["varpi"][0][k]), float(mc["varpi"][1][k])))
    rows.append(OracleRow(config, "zeta", -1, -1, float(terms.zeta), float(mc["zeta"][0]), float(mc["zeta"][1])))
    return rows


def random_configs(n: int = 10, seed: int = 0) -> list[tuple[ScenarioConfig, np.ndarray]]:
    """Small scenarios with mixed Rician factors and hardware, plus random RIS phases.

    Array sizes are drawn from {4, 16}, user counts from {1, 2, 3}.
    """
    rng = rng_mod.stream(seed, "oracle", 1)
    out = []
    for c in range(n):
        M = int(rng.choice([4, 16]))
        N = int(rng.choice([4, 16]))
        K = int(rng.integers(1, 4))
        hardware = {
            "upsilon": float(rng.choice([0.0, rng.uniform(0.5, 30.0)], p=[0.2, 0.8])),
            "kappa": float(rng.uniform(0.5, 1.0)),
            "eta": float(rng.uniform(0.0, 1.5)),
            "bits": int(rng.integers(1, 9)),
        }
        sc = build_scenario(M=M, N=N, K=K, seed=seed * 1000 + c, hardware=hardware,
                            rician_delta=float(rng.uniform(0.0, 4.0)),
                            rician_mu=[float(v) for v in rng.uniform(0.0, 8.0, K)],
                            tx_power=[float(v) for v in rng.uniform(0.2, 2.0, K)])
        out.append((sc, rng.uniform(0.0, 2 * np.pi, N)))
    return out


def oracle_suite(n: int = 10, samples: int = 10**6, seed: int = 0,
                 coefficients: str = "corrected") -> list[OracleRow]:
    """Run :func:`compare` over :func:`random_configs`."""
    rows = []
    for c, (sc, phases) in enumerate(random_configs(n, seed)):
        rows.extend(compare(sc, phases, samples=samples, seed=seed * 1000 + c, config=c,
                            coefficients=coefficients))
    return rows
