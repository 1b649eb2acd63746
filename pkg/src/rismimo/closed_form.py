"""Closed-form ergodic rate, its special cases, limits and power scaling.

The rate of user k is approximated by

    R_k = log2(1 + p_k tau^2 xi_k / (sum_{i != k} p_i tau^2 gamma_ki
                                     + tau (1 - tau) varpi_k zeta M
                                     + tau (sigma_rf^2 + sigma^2) varpi_k M))

where ``xi_k = E|v_k^H u_k|^2``, ``gamma_ki = E|v_k^H u_i|^2``,
``varpi_k = E|[G Phi h_k]_m|^2`` and ``zeta`` is the mean received power
at one RF chain, with ``v_k = G Phi h_k`` the MRC combiner and
``u_i = chi G Phi Theta h_i`` the impaired effective channel.

``xi_k`` and ``gamma_ki`` are expressed through polynomial coefficients
``c_k1..c_k4`` and ``z_ki1..z_ki4``. The plain term-by-term expansion
(``coefficients="printed"``) misses contributions to three of them, which
brute-force Monte Carlo evaluation of the defining expectations exposes;
``coefficients="corrected"`` (the default) adds the missing terms. See
:func:`coefficients_c` and :func:`coefficients_z`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arrays import direction_cosines, grid_coords, ris_gains
from .channel import ris_departure, user_los
from .hardware import HardwareProfile
from .mc_rate import RateReport
from .scenario import ScenarioConfig

COEFFICIENT_SETS = ("corrected", "printed")
REGIMES = ("M_only", "MN_unaligned", "MN_aligned_k")

# |f_k| above this fraction of N counts as "RIS aligned to user k".
ALIGNED_FRACTION = 0.999


def _check_set(coefficients: str) -> None:
    if coefficients not in COEFFICIENT_SETS:
        raise ValueError(f"coefficients must be one of {COEFFICIENT_SETS}, got {coefficients!r}")


def coefficients_c(mu, delta, rho, iota, N, F, coefficients: str = "corrected"):
    """Coefficients ``(c1, c2, c3, c4)`` of the desired-signal term.

    Parameters
    ----------
    mu : array_like
        Rician factor of the user.
    delta : float
        Rician factor of the RIS-BS channel.
    rho, iota : float
        Phase-noise and RF phase-error means.
    N : int
        RIS size.
    F : array_like
        ``|f_k|**2``.
    coefficients : {"corrected", "printed"}
        ``"corrected"`` adds ``2 delta mu N`` to ``c1`` and
        ``2 (1 - iota^2) delta mu + 4 iota^2`` to ``c3``.
    """
    _check_set(coefficients)
    m, d, r2, i2 = mu, delta, rho**2, iota**2
    c1 = ((r2 * (m + d + 1) ** 2 + (1 - r2) * d**2 * m + d**2) * N**2
          + (((2 * m + 3 * d + 2 - d * m) * r2 + (1 + m) * d) * d * m * F
             + (m + d + 2) ** 2 - r2 * (m + d + 1) ** 2 - 2 * r2 * d * m - 2) * N
          + r2 * d**2 * m**2 * F**2 + 2 * ((1 - r2) * (m + d) + 2) * d * m * F)
    c2 = (((1 - i2) * (m + d + 1) ** 2 - d * m * (m + 1 + d - i2 * d)) * r2
          + (d + m + 1) * d * m + (m + d + 1) ** 2 - (m + 1) * i2 * d**2)
    c3 = ((((3 - 2 * i2) * (m + 1) + (i2 - 1) * d * (m - 3)) * r2 + (d + 1 - i2 * d) * (m + 1)) * d * m * F
          + ((i2 - 1) * (m + d + 1) ** 2 + (i2 - 2) * 2 * m * d) * r2
          + (1 - i2) * (m + d + 2) ** 2 + 2 * m * d + 2 * m + 2 * d - 1 - 2 * i2)
    c4 = ((1 - i2) * r2 * d**2 * m**2 * F**2
          + 2 * d * m * F * ((1 - i2) * (1 - r2) * (m + d + 1) + (2 - i2) * (1 + r2)))
    if coefficients == "corrected":
        c1 = c1 + 2 * d * m * N
        c3 = c3 + 2 * (1 - i2) * d * m + 4 * i2
    return c1, c2, c3, c4


def coefficients_z(mu_k, mu_i, delta, rho, iota, N, F_k, F_i, C, RE, coefficients: str = "corrected"):
    """Coefficients ``(z1, z2, z3, z4)`` of the interference from user i onto user k.

    ``C = |hbar_k^H hbar_i|^2`` and ``RE = Re(conj(f_k) f_i hbar_i^H hbar_k)``.
    The corrected set drops the constant ``-1`` from ``z2``.
    """
    _check_set(coefficients)
    m, mi, d, r2, i2 = mu_k, mu_i, delta, rho**2, iota**2
    w = mi + 1 - r2 * mi
    z1 = (w * d**2 * N**2
          + (w * d**2 * m * F_k + r2 * d**2 * mi * F_i + (m + 2 * d + 1) * w + r2 * mi) * N
          + (2 * d * F_i + m * C + 2 * d * m * RE) * r2 * mi
          + (r2 * d * mi * F_i + 2 * mi * (1 - r2) + 2) * d * m * F_k)
    z2 = ((d + 1) * m + (d + 1) ** 2 - i2 * d**2) * (mi + 1) - (m + d + 1 - i2 * d) * r2 * d * mi - 1
    z3 = (((1 - i2) * d * w + mi + 1) * d * m * F_k
          + ((mi + 1) * (m + 2 * d + 1) - (m + 2 * d) * r2 * mi) * (1 - i2)
          + (m + d + 1 - i2 * d) * r2 * d * mi * F_i)
    z4 = (((d * F_i - 2) * r2 * mi + 2 * mi + 2) * (1 - i2) * d * m * F_k
          + (1 - i2) * r2 * m * mi * (C + 2 * d * RE)
          + 2 * (1 - i2) * r2 * d * mi * F_i)
    if coefficients == "corrected":
        z2 = z2 + 1
    return z1, z2, z3, z4


@dataclass(frozen=True)
class ClosedFormTerms:
    """Expectations entering the closed-form rate.

    Arrays carry any leading batch dimensions of the phase input. ``gamma``
    is K x K with ``gamma[..., k, i]`` the interference of user i at user k
    and a zero diagonal. ``c`` stacks ``c_k1..c_k4`` on the last axis and
    ``z`` stacks ``z_ki1..z_ki4`` likewise.
    """

    xi: np.ndarray
    gamma: np.ndarray
    varpi: np.ndarray
    zeta: np.ndarray
    c: np.ndarray
    z: np.ndarray
    f: np.ndarray
    rho: float
    iota: float


def _geometry(scenario: ScenarioConfig, phases):
    """RIS gains of all users and the LoS Gram matrix."""
    phases = np.asarray(phases, dtype=float)
    if phases.shape[-1] != scenario.N:
        raise ValueError(f"expected {scenario.N} phase shifts, got {phases.shape[-1]}")
    H_bar = user_los(scenario)
    f = ris_gains(phases, ris_departure(scenario), H_bar)
    gram = H_bar.conj().T @ H_bar  # gram[a, b] = hbar_a^H hbar_b
    return f, gram


def closed_form_terms(scenario: ScenarioConfig, phases, coefficients: str = "corrected") -> ClosedFormTerms:
    """Evaluate every closed-form expectation for RIS phases ``phases``.

    ``phases`` has shape ``(..., N)``; all outputs gain the same leading
    dimensions, which lets a whole GA population be evaluated at once.
    """
    hw = scenario.hardware.derived()
    rho, iota = hw.rho, hw.iota
    kappa = scenario.hardware.kappa
    M, N, K = scenario.M, scenario.N, scenario.K
    delta = scenario.rician_delta
    mu, alpha, beta, p = scenario.mu, scenario.alpha, scenario.beta, scenario.powers

    f, gram = _geometry(scenario, phases)
    F = np.abs(f) ** 2

    c = np.stack(np.broadcast_arrays(*coefficients_c(mu, delta, rho, iota, N, F, coefficients)), axis=-1)
    pre_xi = beta**2 * alpha**2 * kappa**2 * M / ((delta + 1) ** 2 * (mu + 1) ** 2)
    xi = pre_xi * (c[..., 0] * iota**2 * M + c[..., 1] * N**2 + c[..., 2] * N + c[..., 3])

    # Axis -2 indexes the observed user k, axis -1 the interferer i.
    mk, mi = mu[:, None], mu[None, :]
    C = np.abs(gram) ** 2
    RE = np.real(np.conj(f)[..., :, None] * f[..., None, :] * gram.T)
    z = np.stack(np.broadcast_arrays(*coefficients_z(mk, mi, delta, rho, iota, N, F[..., :, None],
                                                     F[..., None, :], C, RE, coefficients)), axis=-1)
    off = ~np.eye(K, dtype=bool)
    z = z * off[..., None]
    pre_gamma = (kappa**2 * beta**2 * np.outer(alpha, alpha) * M
                 / ((delta + 1) ** 2 * np.outer(mu + 1, mu + 1)))
    gamma = pre_gamma * (z[..., 0] * iota**2 * M + z[..., 1] * N**2 + z[..., 2] * N + z[..., 3])

    scat = beta * alpha / ((delta + 1) * (mu + 1))
    varpi = scat * (delta * mu * F + (mu + delta + 1) * N)
    zeta = np.sum(kappa**2 * p * scat
                  * (rho**2 * delta * mu * F + ((1 - rho**2) * delta * mu + delta + mu + 1) * N), axis=-1)
    return ClosedFormTerms(xi=xi, gamma=gamma, varpi=varpi, zeta=zeta, c=c, z=z, f=f, rho=rho, iota=iota)


def rate_denominator(scenario: ScenarioConfig, terms: ClosedFormTerms) -> np.ndarray:
    """Interference plus all noise terms of the closed-form SINR, per user."""
    tau = scenario.hardware.derived().tau
    hw = scenario.hardware
    p, M = scenario.powers, scenario.M
    interference = tau**2 * np.sum(terms.gamma * p, axis=-1)
    qn = tau * (1 - tau) * terms.varpi * terms.zeta[..., None] * M
    noise = tau * (hw.sigma2_rf + hw.sigma2) * terms.varpi * M
    return interference + qn + noise


def closed_form_rates(scenario: ScenarioConfig, phases, coefficients: str = "corrected") -> np.ndarray:
    """Per-user closed-form rates, shape ``phases.shape[:-1] + (K,)``."""
    tau = scenario.hardware.derived().tau
    if not 0 < tau <= 1:
        raise ValueError(f"AQNM gain must lie in (0, 1], got {tau}")
    terms = closed_form_terms(scenario, phases, coefficients)
    signal = scenario.powers * tau**2 * terms.xi
    return np.log2(1 + signal / rate_denominator(scenario, terms))


def rate_closed_form(scenario: ScenarioConfig, phases, coefficients: str = "corrected") -> RateReport:
    """Closed-form per-user and sum rate for a single phase vector."""
    phases = np.asarray(phases, dtype=float)
    if phases.ndim != 1:
        raise ValueError("rate_closed_form takes one phase vector; use closed_form_rates for batches")
    rates = closed_form_rates(scenario, phases, coefficients)
    return RateReport(per_user_rate=rates, method="closed")


def rate_rayleigh(scenario: ScenarioConfig, phases=None, coefficients: str = "corrected") -> RateReport:
    """Closed-form rate written out explicitly for pure Rayleigh fading.

    With no LoS components the result no longer depends on the RIS phases;
    ``phases`` is accepted for interface symmetry only.
    """
    _check_set(coefficients)
    if scenario.rician_delta != 0 or np.any(scenario.mu != 0):
        raise ValueError("rate_rayleigh needs all Rician factors equal to zero")
    hw = scenario.hardware
    d = hw.derived()
    r2, i2, tau = d.rho**2, d.iota**2, d.tau
    M, N = scenario.M, scenario.N
    pa = scenario.powers * scenario.alpha
    const = 3 - 2 * i2 if coefficients == "corrected" else 3 - 6 * i2
    extra_n = N if coefficients == "corrected" else 0
    num = (r2 * N + 2 - r2) * i2 * M + ((1 - i2) * r2 + 1) * N + (i2 - 1) * r2 + const
    ratio = pa[None, :] / pa[:, None]  # ratio[k, i] = p_i alpha_i / (p_k alpha_k)
    den = (ratio @ np.full(scenario.K, i2 * M + 1 - i2 + extra_n + (1 - tau) / tau * N)
           + (hw.sigma2_rf + hw.sigma2) / (pa * tau * hw.kappa**2 * scenario.beta)
           - i2 * M - 1 + i2 - extra_n)
    return RateReport(per_user_rate=np.log2(1 + num / den), method="closed")


def aligned_phases(scenario: ScenarioConfig, k: int) -> np.ndarray:
    """RIS phases that co-phase every reflected path of user k, in [0, 2 pi).

    With these phases ``|f_k| = N``.
    """
    if not 0 <= k < scenario.K:
        raise IndexError(f"user index {k} out of range for K={scenario.K}")
    ang = scenario.angles
    x, y = grid_coords(scenario.N)
    uk, vk = direction_cosines(ang.phi_kr_a[k], ang.phi_kr_e[k])
    ut, vt = direction_cosines(ang.phi_t_a, ang.phi_t_e)
    theta = -2 * np.pi * scenario.spacing_ratio * (x * (uk - ut) + y * (vk - vt))
    return np.mod(theta, 2 * np.pi)


def is_aligned(scenario: ScenarioConfig, phases) -> np.ndarray:
    """Boolean per user: does ``phases`` align the RIS to that user."""
    f, _ = _geometry(scenario, phases)
    return np.abs(f) > ALIGNED_FRACTION * scenario.N


def aligned_limit(tau: float, iota: float, M: int) -> float:
    """Large-RIS rate of an aligned user from the ADC gain and RF-phase factor."""
    if not 0 < tau < 1:
        raise ValueError("limit needs 0 < tau < 1 (undefined for an ideal ADC)")
    i2 = iota**2
    return float(np.log2(tau * i2 * M / (1 - tau) + (1 - i2 * tau) / (1 - tau)))


def limit_aligned_N_infinity(hardware: HardwareProfile, M: int) -> float:
    """Rate of an aligned user as the RIS grows without bound."""
    d = hardware.derived()
    return aligned_limit(d.tau, d.iota, M)


def _rician_ratio(scenario: ScenarioConfig, pa):
    """Shared interference sum of the large-array limits, per user."""
    mu, r2 = scenario.mu, scenario.hardware.derived().rho ** 2
    w = mu + 1 - r2 * mu
    ratio = (pa[None, :] * (mu[:, None] + 1)) / (pa[:, None] * (mu[None, :] + 1)) * w[None, :]
    np.fill_diagonal(ratio, 0.0)
    return ratio.sum(axis=1)


def _signal_unaligned(scenario: ScenarioConfig):
    delta, mu = scenario.rician_delta, scenario.mu
    if delta == 0:
        raise ValueError("the unaligned large-array limit needs a LoS RIS-BS channel (delta > 0)")
    r2 = scenario.hardware.derived().rho ** 2
    return r2 / delta**2 * (mu + delta + 1) ** 2 + mu + 1 - r2 * mu


def _require_unaligned(scenario, phases):
    if phases is not None and np.any(is_aligned(scenario, phases)):
        raise ValueError("the unaligned limit assumes no user is aligned to the RIS")


def limit_MN_infinity(scenario: ScenarioConfig, phases=None) -> np.ndarray:
    """Per-user rate as M and N grow together with no user aligned.

    If ``phases`` is given, it is checked that no user is aligned.
    """
    _require_unaligned(scenario, phases)
    num = _signal_unaligned(scenario)
    with np.errstate(divide="ignore"):
        return np.log2(1 + num / _rician_ratio(scenario, scenario.powers * scenario.alpha))


@dataclass(frozen=True)
class ScalingConstants:
    """Large-M constants of the power-scaling laws.

    ``Gamma_ki[k, i]`` has a zero diagonal. ``varpi`` is the combiner-norm
    coefficient; ``eps`` the scaling exponent in ``p = E_u / M**eps``,
    unrelated to the RIS phase-noise samples.
    """

    Gamma_k: np.ndarray
    Gamma_ki: np.ndarray
    varpi: np.ndarray
    eps: float
    E_u: float


def scaling_constants(scenario: ScenarioConfig, phases, eps: float = 1.0, E_u: float = 10.0,
                      coefficients: str = "corrected") -> ScalingConstants:
    """Constants of the rate limit under ``p_k = E_u / M**eps`` as M grows."""
    if eps < 0:
        raise ValueError("scaling exponent must be >= 0")
    terms = closed_form_terms(scenario, phases, coefficients)
    d = scenario.hardware.derived()
    kappa, beta, delta = scenario.hardware.kappa, scenario.beta, scenario.rician_delta
    alpha, mu = scenario.alpha, scenario.mu
    common = d.tau**2 * d.iota**2 * kappa**2 * beta**2
    Gamma_k = common * alpha**2 / ((delta + 1) ** 2 * (mu + 1) ** 2) * terms.c[..., 0]
    Gamma_ki = (common * np.outer(alpha, alpha) / ((delta + 1) ** 2 * np.outer(mu + 1, mu + 1))
                * terms.z[..., 0])
    return ScalingConstants(Gamma_k=Gamma_k, Gamma_ki=Gamma_ki, varpi=terms.varpi, eps=eps, E_u=E_u)


def scaled_rate_limit(scenario: ScenarioConfig, phases, eps: float, E_u: float, regime: str = "M_only",
                      k: int | None = None, coefficients: str = "corrected"):
    """Limit of the per-user rates under power scaling.

    Parameters
    ----------
    scenario : ScenarioConfig
    phases : array_like
        Fixed RIS phases.
    eps : float
        Exponent of ``p = E_u / M**eps`` (``"M_only"`` regime only).
    E_u : float
        Reference power in watts.
    regime : {"M_only", "MN_unaligned", "MN_aligned_k"}
        ``"M_only"``: M grows with ``p = E_u / M**eps``.
        ``"MN_unaligned"``: M, N grow with ``p = E_u / (M N)``.
        ``"MN_aligned_k"``: M, N grow, RIS aligned to user ``k`` with
        ``p_k = E_u / (M N^2)`` and ``p_i = E_u / (M N)`` otherwise.
    k : int, optional
        Aligned user for ``"MN_aligned_k"``.

    Returns
    -------
    numpy.ndarray or float
        Per-user limits, or the limit of user ``k`` for ``"MN_aligned_k"``.
    """
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")
    if eps < 0:
        raise ValueError("scaling exponent must be >= 0")
    hw = scenario.hardware
    d = hw.derived()
    noise = hw.sigma2_rf + hw.sigma2
    if regime == "M_only":
        sc = scaling_constants(scenario, phases, eps, E_u, coefficients)
        if eps > 1:
            return np.zeros(scenario.K)
        interference = sc.Gamma_ki.sum(axis=-1)
        with np.errstate(divide="ignore"):
            if eps == 1:
                return np.log2(1 + E_u * sc.Gamma_k / (E_u * interference + noise * d.tau * sc.varpi))
            return np.log2(1 + sc.Gamma_k / interference)

    alpha, mu, delta = scenario.alpha, scenario.mu, scenario.rician_delta
    kappa, beta = hw.kappa, scenario.beta
    gain = E_u * d.tau * d.iota**2 * kappa**2 * beta * alpha
    if regime == "MN_unaligned":
        _require_unaligned(scenario, phases)
        num = _signal_unaligned(scenario)
        den = _rician_ratio(scenario, alpha) + noise * (mu + delta + 1) * (delta + 1) * (mu + 1) / (gain * delta**2)
        return np.log2(1 + num / den)

    if k is None or not 0 <= k < scenario.K:
        raise ValueError("MN_aligned_k needs a valid user index k")
    if delta == 0:
        raise ValueError("the aligned large-array limit needs delta > 0")
    if phases is not None and not is_aligned(scenario, phases)[k]:
        raise ValueError(f"phases are not aligned to user {k}")
    r2 = d.rho**2
    num = r2 * mu[k]
    den = _rician_ratio(scenario, alpha)[k] + noise * (delta + 1) * (mu[k] + 1) / (gain[k] * delta)
    return float(np.log2(1 + num / den))
