"""Uniform square planar array responses and RIS gain scalars.

Elements are indexed from 0 here. Element ``i`` of an X-element array sits
at grid position ``x_i = i mod sqrt(X)``, ``y_i = i // sqrt(X)``, so the
first element is the phase reference and equals 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def side_length(X: int) -> int:
    """Return sqrt(X), raising if X is not a positive perfect square."""
    if int(X) != X or X < 1:
        raise ValueError(f"array size must be a positive integer, got {X}")
    s = math.isqrt(int(X))
    if s * s != X:
        raise ValueError(f"array size {X} is not a perfect square")
    return s


def grid_coords(X: int) -> tuple[np.ndarray, np.ndarray]:
    """Return the integer grid coordinates ``(x, y)`` of all X elements."""
    s = side_length(X)
    i = np.arange(X)
    return i % s, i // s


def direction_cosines(phi1, phi2) -> tuple[np.ndarray, np.ndarray]:
    """Phase slopes along the two array axes for angles ``(phi1, phi2)``."""
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    return np.sin(phi1) * np.sin(phi2), np.cos(phi2)


def steering_vector(X: int, phi1, phi2, spacing_ratio: float = 0.5) -> np.ndarray:
    """Array response of an X-element square planar array.

    Element i is ``exp(j 2 pi d/lambda (x_i sin(phi1) sin(phi2) + y_i cos(phi2)))``.
    ``phi1`` and ``phi2`` may be arrays of equal shape, in which case the
    result has shape ``phi1.shape + (X,)``.
    """
    x, y = grid_coords(X)
    u, v = direction_cosines(phi1, phi2)
    phase = 2 * np.pi * spacing_ratio * (x * u[..., None] + y * v[..., None])
    return np.exp(1j * phase)


def steering_inner_product(a1, a2) -> complex:
    """Return ``a1^H a2`` by direct summation."""
    a1 = np.asarray(a1)
    a2 = np.asarray(a2)
    if a1.shape[-1] != a2.shape[-1]:
        raise ValueError("steering vectors have different lengths")
    return np.sum(np.conj(a1) * a2, axis=-1)


def _axis_sum(n: int, slope, spacing_ratio: float):
    """Closed form of ``sum_{x=0}^{n-1} exp(j 2 pi d x s)``.

    Equals ``n sinc(d n s)/sinc(d s) exp(j pi d (n-1) s)``. When ``d s`` is
    a nonzero integer both sincs vanish and every term of the sum is 1, so
    the ratio is replaced by its limit.
    """
    ds = spacing_ratio * np.asarray(slope, dtype=float)
    den = np.sinc(ds)
    on_pole = np.abs(den) < 1e-12
    safe = np.where(on_pole, 1.0, den)
    # At the poles n*sinc(n ds)/sinc(ds) -> n*cos(pi n ds)/cos(pi ds).
    limit = n * np.cos(np.pi * n * ds) / np.cos(np.pi * ds)
    ratio = np.where(on_pole, limit, n * np.sinc(n * ds) / safe)
    return ratio * np.exp(1j * np.pi * (n - 1) * ds)


def steering_inner_product_closed(X: int, angles1, angles2, spacing_ratio: float = 0.5):
    """Closed form of ``a_X(angles1)^H a_X(angles2)``.

    The planar sum factors into a product of two geometric series, one per
    array axis, each of Dirichlet-kernel form.

    Parameters
    ----------
    X : int
        Number of elements (perfect square).
    angles1, angles2 : tuple
        ``(phi1, phi2)`` pairs; components may be arrays.
    """
    s = side_length(X)
    u1, v1 = direction_cosines(*angles1)
    u2, v2 = direction_cosines(*angles2)
    return _axis_sum(s, u2 - u1, spacing_ratio) * _axis_sum(s, v2 - v1, spacing_ratio)


@dataclass(frozen=True)
class RisGain:
    """Per-user RIS gain ``f_k = sum_n conj(a_t,n) exp(j theta_n) hbar_k,n``."""

    f: complex
    terms: np.ndarray


def ris_gain(theta, a_t, h_bar) -> RisGain:
    """Compute the RIS gain of one user.

    Parameters
    ----------
    theta : array_like
        RIS phase shifts, length N.
    a_t : array_like
        RIS departure steering vector towards the BS, length N.
    h_bar : array_like
        LoS user-to-RIS steering vector, length N.
    """
    theta = np.asarray(theta, dtype=float)
    if not (theta.shape[-1] == len(a_t) == len(h_bar)):
        raise ValueError("theta, a_t and h_bar must have the same length")
    if not np.all(np.isfinite(theta)):
        raise ValueError("phase shifts must be finite")
    terms = np.conj(a_t) * np.exp(1j * theta) * h_bar
    return RisGain(f=complex(terms.sum()), terms=terms)


def ris_gains(theta, a_t, H_bar) -> np.ndarray:
    """Vectorized RIS gains of all users.

    ``theta`` has shape ``(..., N)`` and ``H_bar`` is N x K; the result has
    shape ``(..., K)``.
    """
    theta = np.asarray(theta, dtype=float)
    return (np.exp(1j * theta) * np.conj(a_t)) @ H_bar
