"""Hardware impairment models.

Covers RIS phase noise (von Mises), RF-chain amplitude/phase errors,
low-resolution ADCs under the additive quantization noise model, and the
scalar moments of each that enter the closed-form rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

# Inverse SQNR of an optimal non-uniform quantizer for 1..5 bits.
VARRHO_TABLE = (0.3634, 0.1175, 0.03454, 0.009497, 0.002499)

# Beyond this concentration the Best-Fisher constants lose precision and
# the von Mises law is indistinguishable from a wrapped normal.
_VM_NORMAL_SWITCH = 1e6


@dataclass(frozen=True)
class HardwareProfile:
    """Impairment levels shared by all RIS elements and RF chains.

    Attributes
    ----------
    upsilon : float
        Phase-noise concentration; 0 means uniformly random phase errors.
    kappa : float
        RF-chain amplitude attenuation in [0, 1].
    eta : float
        Half-width of the uniform RF phase error, in [0, pi).
    sigma2_rf : float
        RF distortion-noise power in watts.
    sigma2 : float
        Receiver noise power in watts.
    bits : int
        ADC resolution.
    """

    upsilon: float = 20.0
    kappa: float = 0.9
    eta: float = math.pi / 6
    sigma2_rf: float = 10 ** (-104 / 10) * 1e-3
    sigma2: float = 10 ** (-104 / 10) * 1e-3
    bits: int = 2

    def __post_init__(self):
        if not self.upsilon >= 0:
            raise ValueError(f"upsilon must be >= 0, got {self.upsilon}")
        if not 0 <= self.kappa <= 1:
            raise ValueError(f"kappa must lie in [0, 1], got {self.kappa}")
        if not 0 <= self.eta < math.pi:
            raise ValueError(f"eta must lie in [0, pi), got {self.eta}")
        if not (self.sigma2_rf >= 0 and self.sigma2 >= 0):
            raise ValueError("noise powers must be non-negative")
        if int(self.bits) != self.bits or self.bits < 1:
            raise ValueError(f"bits must be a positive integer, got {self.bits}")

    def derived(self) -> "DerivedHardware":
        varrho, tau = quantizer_params(self.bits)
        return DerivedHardware(
            rho=bessel_ratio_rho(self.upsilon),
            iota=iota(self.eta),
            varrho=varrho,
            tau=tau,
        )


@dataclass(frozen=True)
class DerivedHardware:
    """Scalar moments implied by a :class:`HardwareProfile`.

    ``rho`` is E[exp(j eps)] for the phase noise, ``iota`` is E[exp(j phi)]
    for the RF phase error, ``varrho`` the inverse SQNR and ``tau = 1 - varrho``
    the AQNM gain.
    """

    rho: float
    iota: float
    varrho: float
    tau: float


def dbm_to_watt(dbm):
    """Convert dBm to watts."""
    return 10.0 ** (dbm / 10.0) * 1e-3


def bessel_ratio_rho(upsilon):
    """Return I1(upsilon) / I0(upsilon).

    Exponentially scaled Bessel functions keep the ratio finite for very
    large concentrations, where I0 and I1 themselves overflow.
    """
    u = np.asarray(upsilon, dtype=float)
    if np.any(u < 0) or np.any(np.isnan(u)):
        raise ValueError("upsilon must be >= 0")
    out = special.i1e(u) / special.i0e(u)
    return float(out) if out.ndim == 0 else out


def iota(eta):
    """Return sin(eta)/eta, the mean of exp(j phi) for phi ~ U[-eta, eta]."""
    e = np.asarray(eta, dtype=float)
    if np.any(e < 0) or np.any(e >= np.pi) or np.any(np.isnan(e)):
        raise ValueError("eta must lie in [0, pi)")
    # np.sinc(x) = sin(pi x)/(pi x) and handles x = 0 exactly.
    out = np.sinc(e / np.pi)
    return float(out) if out.ndim == 0 else out


def quantizer_params(bits: int) -> tuple[float, float]:
    """Return ``(varrho, tau)`` for a ``bits``-bit ADC.

    Tabulated values are used up to 5 bits and the high-resolution
    approximation ``pi*sqrt(3)/2 * 2**(-2b)`` above.
    """
    if int(bits) != bits or bits < 1:
        raise ValueError(f"bits must be a positive integer, got {bits}")
    bits = int(bits)
    if bits <= len(VARRHO_TABLE):
        varrho = VARRHO_TABLE[bits - 1]
    else:
        varrho = math.pi * math.sqrt(3) / 2 * 2.0 ** (-2 * bits)
    return varrho, 1.0 - varrho


def sample_von_mises(upsilon: float, size, rng: np.random.Generator) -> np.ndarray:
    """Draw zero-mean von Mises angles by Best-Fisher rejection sampling.

    Returns angles in (-pi, pi]. For ``upsilon == 0`` the law is uniform.
    Candidates are generated in vectorized rounds until every slot is
    filled; the acceptance rate is above 65% for every concentration.
    """
    if upsilon < 0:
        raise ValueError("upsilon must be >= 0")
    size = (size,) if np.isscalar(size) else tuple(size)
    n = int(np.prod(size, dtype=np.int64))
    if upsilon == 0:
        return rng.uniform(-np.pi, np.pi, size)
    if upsilon > _VM_NORMAL_SWITCH:
        eps = rng.standard_normal(n) / math.sqrt(upsilon)
        return np.angle(np.exp(1j * eps)).reshape(size)

    if upsilon < 1e-5:
        r = 1.0 / upsilon + upsilon
    else:
        a = 1.0 + math.sqrt(1.0 + 4.0 * upsilon**2)
        b = (a - math.sqrt(2.0 * a)) / (2.0 * upsilon)
        r = (1.0 + b * b) / (2.0 * b)

    out = np.empty(n)
    filled = 0
    while filled < n:
        m = max(16, int(1.6 * (n - filled)))
        u1, u2, u3 = rng.random((3, m))
        z = np.cos(np.pi * u1)
        f = (1.0 + r * z) / (r + z)
        c = upsilon * (r - f)
        with np.errstate(divide="ignore"):
            ok = (c * (2.0 - c) - u2 > 0) | (np.log(c / u2) + 1.0 - c >= 0)
        theta = np.sign(u3[ok] - 0.5) * np.arccos(np.clip(f[ok], -1.0, 1.0))
        take = min(theta.size, n - filled)
        out[filled:filled + take] = theta[:take]
        filled += take
    return out.reshape(size)


def sample_phase_noise(upsilon: float, N: int, rng: np.random.Generator, size=()) -> np.ndarray:
    """Return the diagonal of the RIS phase-noise matrix, exp(j eps_n).

    ``size`` prepends batch dimensions; the result has shape ``size + (N,)``.
    """
    size = (size,) if np.isscalar(size) else tuple(size)
    return np.exp(1j * sample_von_mises(upsilon, size + (N,), rng))


def sample_rf_chains(kappa: float, eta: float, M: int, rng: np.random.Generator, size=()) -> np.ndarray:
    """Return the diagonal of the RF-chain gain matrix, kappa exp(j phi_m).

    The phase errors are i.i.d. uniform on [-eta, eta].
    """
    size = (size,) if np.isscalar(size) else tuple(size)
    if eta == 0:
        return np.full(size + (M,), kappa, dtype=complex)
    return kappa * np.exp(1j * rng.uniform(-eta, eta, size + (M,)))


def impaired_channel(G, H, chi, theta_noise, phi) -> np.ndarray:
    """Effective channel chi G Phi Theta H seen at the RF chain outputs.

    All diagonal matrices are passed as their diagonals. Leading batch
    dimensions broadcast.
    """
    G = np.asarray(G)
    cascade = (np.asarray(phi) * np.asarray(theta_noise))[..., :, None] * H
    return np.asarray(chi)[..., :, None] * (G @ cascade)


def sq_diagonal(realization, chi, theta_noise, phi, powers, sigma2_rf: float, sigma2: float) -> np.ndarray:
    """Diagonal of the received covariance before quantization.

    The expectation is over data symbols and noise only, conditioned on the
    realized channel and impairments:
    ``[S_Q]_mm = sum_k p_k |[chi G Phi Theta H]_mk|^2 + sigma2_rf + sigma2``.

    Parameters
    ----------
    realization
        Object with ``G`` (M x N) and ``H`` (N x K) attributes.
    chi, theta_noise, phi : array_like
        Diagonals of the RF gain, phase noise and RIS phase matrices.
    powers : array_like
        Per-user transmit powers, length K.
    """
    G, H = realization.G, realization.H
    M, N = G.shape[-2:]
    K = H.shape[-1]
    if H.shape[-2] != N or np.shape(chi)[-1] != M or np.shape(phi)[-1] != N or np.shape(powers)[-1] != K:
        raise ValueError("dimension mismatch in sq_diagonal")
    U = impaired_channel(G, H, chi, theta_noise, phi)
    return (np.abs(U) ** 2 @ np.asarray(powers, dtype=float)) + sigma2_rf + sigma2
