"""Geometry, large-scale fading and validated experiment configuration."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import rng as rng_mod
from .arrays import side_length
from .hardware import HardwareProfile, dbm_to_watt


class ConfigError(ValueError):
    """Raised for malformed or inconsistent configurations."""


@dataclass(frozen=True)
class AngleSet:
    """All angles (radians) that define the LoS channel components.

    ``phi_r_*`` is the arrival direction at the BS, ``phi_t_*`` the
    departure direction from the RIS towards the BS and ``phi_kr_*`` the
    per-user arrival directions at the RIS.
    """

    phi_r_a: float
    phi_r_e: float
    phi_t_a: float
    phi_t_e: float
    phi_kr_a: tuple[float, ...]
    phi_kr_e: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "phi_kr_a", tuple(float(v) for v in self.phi_kr_a))
        object.__setattr__(self, "phi_kr_e", tuple(float(v) for v in self.phi_kr_e))
        vals = [self.phi_r_a, self.phi_r_e, self.phi_t_a, self.phi_t_e, *self.phi_kr_a, *self.phi_kr_e]
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError("angles must be finite")
        if len(self.phi_kr_a) != len(self.phi_kr_e):
            raise ConfigError("per-user azimuth and elevation lists differ in length")

    @classmethod
    def sample(cls, K: int, rng: np.random.Generator) -> "AngleSet":
        """Draw every angle uniformly from (0, 2 pi)."""
        a = rng.uniform(0.0, 2 * np.pi, 4 + 2 * K)
        return cls(*map(float, a[:4]), tuple(a[4:4 + K]), tuple(a[4 + K:]))


def pathloss(distance, exponent: float = 2.8):
    """Large-scale fading ``distance**(-exponent) / 1000``."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0) or not exponent > 0:
        raise ValueError("pathloss needs a positive distance and exponent")
    out = d ** (-exponent) / 1000.0
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete, immutable description of one simulated system.

    Use :func:`build_scenario` to construct one from a plain mapping; it
    fills in random user positions and angles from ``seed``. Direct
    construction requires explicit positions and angles. ``alpha`` (per
    user) and ``beta`` are filled from the geometry.
    """

    M: int
    N: int
    K: int
    bs_pos: tuple[float, float, float]
    ris_pos: tuple[float, float, float]
    user_positions: tuple[tuple[float, float, float], ...]
    angles: AngleSet
    user_circle_radius: float = 5.0
    spacing_ratio: float = 0.5
    rician_delta: float = 1.0
    rician_mu: tuple[float, ...] = ()
    tx_power: tuple[float, ...] = ()
    pathloss_exponent: float = 2.8
    hardware: HardwareProfile = field(default_factory=HardwareProfile)
    seed: int = 0
    mc_realizations: int = 2000
    alpha: np.ndarray = field(init=False, repr=False, compare=False)
    beta: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        try:
            side_length(self.M)
            side_length(self.N)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if int(self.K) != self.K or self.K < 1:
            raise ConfigError(f"K must be a positive integer, got {self.K}")
        set_ = lambda name, value: object.__setattr__(self, name, value)  # noqa: E731
        set_("bs_pos", _point(self.bs_pos, "bs_pos"))
        set_("ris_pos", _point(self.ris_pos, "ris_pos"))
        set_("user_positions", tuple(_point(p, "user_positions") for p in self.user_positions))
        set_("rician_mu", _per_user(self.rician_mu, self.K, "rician_mu"))
        set_("tx_power", _per_user(self.tx_power, self.K, "tx_power"))
        if len(self.user_positions) != self.K:
            raise ConfigError(f"expected {self.K} user positions, got {len(self.user_positions)}")
        if len(self.angles.phi_kr_a) != self.K:
            raise ConfigError(f"expected {self.K} per-user angles, got {len(self.angles.phi_kr_a)}")
        if not self.rician_delta >= 0 or min(self.rician_mu) < 0:
            raise ConfigError("Rician factors must be non-negative")
        if min(self.tx_power) <= 0:
            raise ConfigError("transmit powers must be positive")
        if not self.pathloss_exponent > 0:
            raise ConfigError("pathloss_exponent must be positive")
        if not self.spacing_ratio > 0:
            raise ConfigError("spacing_ratio must be positive")
        if int(self.mc_realizations) != self.mc_realizations or self.mc_realizations < 1:
            raise ConfigError("mc_realizations must be a positive integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

        d_user = np.linalg.norm(np.array(self.user_positions) - np.array(self.ris_pos), axis=1)
        d_ris = float(np.linalg.norm(np.array(self.ris_pos) - np.array(self.bs_pos)))
        if np.any(d_user <= 0) or d_ris <= 0:
            raise ConfigError("a user or the BS coincides with the RIS position")
        alpha = np.asarray(pathloss(d_user, self.pathloss_exponent), dtype=float)
        alpha.setflags(write=False)
        set_("alpha", alpha)
        set_("beta", pathloss(d_ris, self.pathloss_exponent))

    @property
    def powers(self) -> np.ndarray:
        return np.asarray(self.tx_power, dtype=float)

    @property
    def mu(self) -> np.ndarray:
        return np.asarray(self.rician_mu, dtype=float)

    def replace(self, **changes) -> "ScenarioConfig":
        """Copy with some fields changed; hardware fields may be given by name.

        Scalar ``rician_mu`` or ``tx_power`` values are broadcast to all users.
        """
        hw = {k: changes.pop(k) for k in list(changes) if k in _HARDWARE_FIELDS}
        if hw:
            changes["hardware"] = dataclasses.replace(changes.get("hardware", self.hardware), **hw)
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        """Fully resolved configuration as plain Python types."""
        out = {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.init}
        out["bs_pos"] = list(self.bs_pos)
        out["ris_pos"] = list(self.ris_pos)
        out["user_positions"] = [list(p) for p in self.user_positions]
        out["rician_mu"] = list(self.rician_mu)
        out["tx_power"] = list(self.tx_power)
        out["hardware"] = dataclasses.asdict(self.hardware)
        ang = dataclasses.asdict(self.angles)
        out["angles"] = {k: list(v) if isinstance(v, tuple) else v for k, v in ang.items()}
        return out


_HARDWARE_FIELDS = {f.name for f in dataclasses.fields(HardwareProfile)}
_SCENARIO_KEYS = {f.name for f in dataclasses.fields(ScenarioConfig) if f.init}


def _point(p, name) -> tuple[float, float, float]:
    arr = np.asarray(p, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} entries must be finite 3-D coordinates")
    return tuple(float(v) for v in arr)


def _per_user(values, K, name) -> tuple[float, ...]:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.size == 1:
        arr = np.repeat(arr, K)
    if arr.shape != (K,) or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} must be a scalar or a list of {K} finite values")
    return tuple(float(v) for v in arr)


def default_config() -> dict[str, Any]:
    """Baseline raw configuration of the reference simulation setup."""
    return {
        "M": 64,
        "N": 16,
        "K": 4,
        "bs_pos": [0.0, 0.0, 25.0],
        "ris_pos": [5.0, 100.0, 30.0],
        "user_positions": None,
        "user_circle_radius": 5.0,
        "spacing_ratio": 0.5,
        "rician_delta": 1.0,
        "rician_mu": 10.0,
        "tx_power": dbm_to_watt(30.0),
        "pathloss_exponent": 2.8,
        "hardware": {},
        "angles": None,
        "seed": 0,
        "mc_realizations": 2000,
    }


_USER_HEIGHT = 1.6


def sample_user_positions(K: int, radius: float, rng: np.random.Generator) -> list[list[float]]:
    """Place K users uniformly in a disk of ``radius`` around the origin at z = 1.6 m."""
    r = radius * np.sqrt(rng.random(K))
    t = rng.uniform(0.0, 2 * np.pi, K)
    return [[float(a), float(b), _USER_HEIGHT] for a, b in zip(r * np.cos(t), r * np.sin(t))]


def build_scenario(raw: dict[str, Any] | None = None, **overrides) -> ScenarioConfig:
    """Validate a raw mapping and build a :class:`ScenarioConfig`.

    Missing keys take the values of :func:`default_config`. Unknown keys
    raise :class:`ConfigError`. When ``user_positions`` or ``angles`` are
    absent they are drawn from streams derived from ``seed``, so the same
    mapping always yields the same scenario.
    """
    raw = dict(raw or {})
    raw.update(overrides)
    unknown = set(raw) - _SCENARIO_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    cfg = default_config()
    cfg.update(raw)

    hw = cfg["hardware"]
    if isinstance(hw, dict):
        bad = set(hw) - _HARDWARE_FIELDS
        if bad:
            raise ConfigError(f"unknown hardware keys: {sorted(bad)}")
        try:
            hw = HardwareProfile(**hw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
    elif not isinstance(hw, HardwareProfile):
        raise ConfigError("hardware must be a mapping")
    cfg["hardware"] = hw

    try:
        K = int(cfg["K"])
        seed = int(cfg["seed"])
    except (TypeError, ValueError):
        raise ConfigError("K and seed must be integers") from None
    if K < 1:
        raise ConfigError(f"K must be a positive integer, got {cfg['K']}")
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if cfg["user_positions"] is None:
        if not cfg["user_circle_radius"] > 0:
            raise ConfigError("user_circle_radius must be positive")
        cfg["user_positions"] = sample_user_positions(
            K, float(cfg["user_circle_radius"]), rng_mod.stream(seed, "positions"))
    ang = cfg["angles"]
    if ang is None:
        ang = AngleSet.sample(K, rng_mod.stream(seed, "angles"))
    elif isinstance(ang, dict):
        try:
            ang = AngleSet(**ang)
        except TypeError as exc:
            raise ConfigError(f"bad angles block: {exc}") from None
    cfg["angles"] = ang
    try:
        return ScenarioConfig(**cfg)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path) -> dict[str, Any]:
    """Read a YAML or JSON configuration file into a raw mapping."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        if path.suffix.lower() == ".json":
            raw = json.loads(text)
        else:
            import yaml

            raw = yaml.safe_load(text)
    except Exception as exc:  # parser errors carry their own position info
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a mapping")
    return raw
