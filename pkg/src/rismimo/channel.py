"""LoS components and Rician fading realizations of the cascaded channel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arrays import steering_vector
from .rng import crandn
from .scenario import ScenarioConfig


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the user-to-RIS channels ``H`` (N x K) and RIS-to-BS ``G`` (M x N).

    ``H_tilde`` and ``G_tilde`` are the scattered (CN(0, 1)) parts and
    ``H_bar``, ``G_bar`` the deterministic LoS parts. With a batch of
    realizations every array carries an extra leading dimension.
    """

    H: np.ndarray
    G: np.ndarray
    H_bar: np.ndarray
    G_bar: np.ndarray
    H_tilde: np.ndarray
    G_tilde: np.ndarray
    realization_index: int = 0


def ris_departure(scenario: ScenarioConfig) -> np.ndarray:
    """Steering vector a_N of the RIS towards the BS."""
    ang = scenario.angles
    return steering_vector(scenario.N, ang.phi_t_a, ang.phi_t_e, scenario.spacing_ratio)


def user_los(scenario: ScenarioConfig) -> np.ndarray:
    """``H_bar`` (N x K): column k is the RIS steering vector towards user k."""
    ang = scenario.angles
    return steering_vector(scenario.N, np.array(ang.phi_kr_a), np.array(ang.phi_kr_e), scenario.spacing_ratio).T


def los_components(scenario: ScenarioConfig) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(H_bar, G_bar)``.

    ``H_bar`` is :func:`user_los` and ``G_bar = a_M(phi_r) a_N(phi_t)^H``
    is rank one.
    """
    ang = scenario.angles
    H_bar = user_los(scenario)
    a_r = steering_vector(scenario.M, ang.phi_r_a, ang.phi_r_e, scenario.spacing_ratio)
    G_bar = np.outer(a_r, np.conj(ris_departure(scenario)))
    return H_bar, G_bar


def rician_mix(los, nlos, factor):
    """Combine LoS and scattered parts with Rician factor ``factor``.

    ``factor`` broadcasts against the last axis of ``los`` (per-user factors
    for H, a scalar for G).
    """
    factor = np.asarray(factor, dtype=float)
    return np.sqrt(factor / (factor + 1)) * los + np.sqrt(1 / (factor + 1)) * nlos


def sample_channels(scenario: ScenarioConfig, rng: np.random.Generator, index: int = 0,
                    batch: int | None = None, los=None) -> ChannelRealization:
    """Draw a channel realization.

    Parameters
    ----------
    scenario : ScenarioConfig
    rng : numpy.random.Generator
        Stream dedicated to this realization (see :func:`rismimo.rng.stream`).
    index : int
        Realization index recorded in the result.
    batch : int, optional
        If given, draw ``batch`` independent realizations at once.
    los : tuple, optional
        Precomputed ``(H_bar, G_bar)`` to skip recomputation.
    """
    H_bar, G_bar = los if los is not None else los_components(scenario)
    lead = () if batch is None else (batch,)
    H_tilde = crandn(rng, lead + H_bar.shape)
    G_tilde = crandn(rng, lead + G_bar.shape)
    H = np.sqrt(scenario.alpha) * rician_mix(H_bar, H_tilde, scenario.mu)
    G = np.sqrt(scenario.beta) * rician_mix(G_bar, G_tilde, scenario.rician_delta)
    return ChannelRealization(H, G, H_bar, G_bar, H_tilde, G_tilde, index)
