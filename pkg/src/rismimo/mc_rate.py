"""Monte Carlo evaluation of the exact ergodic rate under MRC."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import rng as rng_mod
from .channel import ChannelRealization, los_components, sample_channels
from .hardware import impaired_channel, sample_phase_noise, sample_rf_chains, sq_diagonal
from .scenario import ScenarioConfig

SQ_MODES = ("conditional", "marginal")


@dataclass(frozen=True)
class RateReport:
    """Per-user rates in bits/s/Hz and their sum.

    ``method`` is one of ``"mc"``, ``"closed"`` or ``"limit"``. Monte Carlo
    reports also carry the standard error of each mean and of the sum.
    """

    per_user_rate: np.ndarray
    method: str
    mc_stderr: np.ndarray | None = None
    sum_stderr: float | None = None
    sum_rate: float = field(init=False)

    def __post_init__(self):
        rates = np.asarray(self.per_user_rate, dtype=float)
        object.__setattr__(self, "per_user_rate", rates)
        object.__setattr__(self, "sum_rate", float(rates.sum()))


@dataclass(frozen=True)
class InstantaneousTerms:
    """Signal, interference and noise powers (watts) of one realization.

    ``interference[..., k, i]`` is the power leaked from user i into the
    MRC output of user k (zero diagonal).
    """

    desired: np.ndarray
    interference: np.ndarray
    dn: np.ndarray
    an: np.ndarray
    qn: np.ndarray
    sinr: np.ndarray

    @property
    def interference_total(self) -> np.ndarray:
        return self.interference.sum(axis=-1)


def instantaneous_sinr(realization: ChannelRealization, theta_noise, chi, phi, scenario: ScenarioConfig,
                       sq_mode: str = "conditional", zeta: float | None = None) -> InstantaneousTerms:
    """Per-user SINR at the MRC output for one realization.

    Parameters
    ----------
    realization : ChannelRealization
        May carry a leading batch dimension, shared by ``theta_noise`` and ``chi``.
    theta_noise : array_like
        Phase-noise diagonal exp(j eps_n), length N.
    chi : array_like
        RF-chain gain diagonal, length M.
    phi : array_like
        RIS reflection diagonal exp(j theta_n), length N.
    scenario : ScenarioConfig
    sq_mode : {"conditional", "marginal"}
        Quantization-noise covariance conditioned on this realization, or
        its average ``zeta + sigma_rf^2 + sigma^2`` (``zeta`` required).
    """
    if sq_mode not in SQ_MODES:
        raise ValueError(f"sq_mode must be one of {SQ_MODES}")
    hw = scenario.hardware
    tau = hw.derived().tau
    if not 0 < tau <= 1:
        raise ValueError(f"AQNM gain must lie in (0, 1], got {tau}")
    G, H = realization.G, realization.H
    M, N = G.shape[-2:]
    if H.shape[-2] != N or np.shape(phi)[-1] != N or np.shape(theta_noise)[-1] != N or np.shape(chi)[-1] != M:
        raise ValueError("dimension mismatch in instantaneous_sinr")
    p = scenario.powers

    V = G @ (np.asarray(phi)[..., :, None] * H)  # MRC combiners, one column per user
    U = impaired_channel(G, H, chi, theta_noise, phi)
    X = np.swapaxes(V.conj(), -1, -2) @ U  # X[k, i] = v_k^H u_i
    power = tau**2 * np.abs(X) ** 2 * p
    desired = np.diagonal(power, axis1=-2, axis2=-1).copy()
    interference = power * (1 - np.eye(H.shape[-1]))

    absV2 = np.abs(V) ** 2
    vnorm2 = absV2.sum(axis=-2)
    dn = tau**2 * hw.sigma2_rf * vnorm2
    an = tau**2 * hw.sigma2 * vnorm2
    if sq_mode == "conditional":
        s = sq_diagonal(realization, chi, theta_noise, phi, p, hw.sigma2_rf, hw.sigma2)
    else:
        if zeta is None:
            raise ValueError("marginal quantization noise needs zeta")
        s = np.full(G.shape[:-1], zeta + hw.sigma2_rf + hw.sigma2)
    qn = tau * (1 - tau) * np.einsum("...m,...mk->...k", s, absV2)

    den = interference.sum(axis=-1) + dn + an + qn
    with np.errstate(divide="ignore", invalid="ignore"):
        sinr = np.where(desired > 0, desired / den, 0.0)
    return InstantaneousTerms(desired, interference, dn, an, qn, sinr)


def draw_realization(scenario: ScenarioConfig, index: int, los=None):
    """Channel, phase noise and RF gains of realization ``index``.

    Each entity uses its own stream keyed by ``(seed, entity, index)``.
    """
    seed = scenario.seed
    hw = scenario.hardware
    ch = sample_channels(scenario, rng_mod.stream(seed, "channel", index), index=index, los=los)
    theta = sample_phase_noise(hw.upsilon, scenario.N, rng_mod.stream(seed, "phase_noise", index))
    chi = sample_rf_chains(hw.kappa, hw.eta, scenario.M, rng_mod.stream(seed, "rf", index))
    return ch, theta, chi


def realization_rates(scenario: ScenarioConfig, phases, indices, sq_mode: str = "conditional",
                      zeta: float | None = None, los=None) -> np.ndarray:
    """log2(1 + SINR) for each realization in ``indices``, shape (len, K)."""
    los = los if los is not None else los_components(scenario)
    draws = [draw_realization(scenario, int(t), los) for t in indices]
    H = np.stack([d[0].H for d in draws])
    G = np.stack([d[0].G for d in draws])
    theta = np.stack([d[1] for d in draws])
    chi = np.stack([d[2] for d in draws])
    batch = ChannelRealization(H, G, *los, None, None, -1)
    phi = np.exp(1j * np.asarray(phases, dtype=float))
    terms = instantaneous_sinr(batch, theta, chi, phi, scenario, sq_mode, zeta)
    return np.log2(1 + terms.sinr)


def ergodic_rate_mc(scenario: ScenarioConfig, phases, T: int | None = None, sq_mode: str = "conditional",
                    threads: int = 1, chunk: int = 64) -> RateReport:
    """Monte Carlo ergodic rate, averaging ``T`` independent realizations.

    Geometry, LoS parts and RIS phases stay fixed; the scattered channel
    parts, RIS phase noise and RF phase errors are redrawn for every
    realization. Results are gathered by realization index and reduced with
    numpy's pairwise summation, so the output is identical for any number
    of threads.
    """
    T = scenario.mc_realizations if T is None else int(T)
    if T < 1:
        raise ValueError("T must be >= 1")
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (scenario.N,):
        raise ValueError(f"expected {scenario.N} phase shifts")
    zeta = None
    if sq_mode == "marginal":
        from .closed_form import closed_form_terms

        zeta = float(closed_form_terms(scenario, phases).zeta)
    los = los_components(scenario)
    rates = np.empty((T, scenario.K))
    starts = range(0, T, chunk)

    def work(a):
        b = min(a + chunk, T)
        rates[a:b] = realization_rates(scenario, phases, range(a, b), sq_mode, zeta, los)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(work, starts))
    else:
        for a in starts:
            work(a)

    mean = rates.mean(axis=0)
    if T > 1:
        stderr = rates.std(axis=0, ddof=1) / np.sqrt(T)
        sum_stderr = float(rates.sum(axis=1).std(ddof=1) / np.sqrt(T))
    else:
        stderr = np.full(scenario.K, np.nan)
        sum_stderr = float("nan")
    return RateReport(per_user_rate=mean, method="mc", mc_stderr=stderr, sum_stderr=sum_stderr)
