"""Deterministic, splittable random streams.

Every random quantity in the package is drawn from a generator keyed by
``(seed, tag, index)``. Streams with different keys are statistically
independent, so realizations can be produced in any order or in parallel
and still give identical results.
"""

from __future__ import annotations

import numpy as np

# Fixed integer codes; never renumber, or stored seeds stop reproducing.
TAGS = {
    "positions": 1,
    "angles": 2,
    "channel": 3,
    "phase_noise": 4,
    "rf": 5,
    "phases": 6,
    "ga": 7,
    "oracle": 8,
}


def stream(seed: int, tag: str, index: int = 0) -> np.random.Generator:
    """Return the generator for ``(seed, tag, index)``.

    Parameters
    ----------
    seed : int
        Non-negative experiment seed (up to 64 bits).
    tag : str
        Entity name, one of ``TAGS``.
    index : int, optional
        Realization or sub-stream index.
    """
    if tag not in TAGS:
        raise KeyError(f"unknown stream tag {tag!r}")
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(TAGS[tag], int(index)))
    return np.random.Generator(np.random.Philox(ss))


def crandn(rng: np.random.Generator, shape) -> np.ndarray:
    """Draw i.i.d. circularly symmetric CN(0, 1) samples."""
    shape = (shape,) if np.isscalar(shape) else tuple(shape)
    z = rng.standard_normal((2,) + shape)
    return (z[0] + 1j * z[1]) / np.sqrt(2.0)
