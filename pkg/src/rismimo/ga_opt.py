"""Genetic-algorithm search over RIS phase shifts.

Maximizes the closed-form sum rate with roulette selection, single-point
crossover, per-gene mutation and elitism. In discrete mode genes are
integer levels ``0 .. 2**B - 1`` mapped to phases ``level * 2 pi / 2**B``.

All randomness comes from one generator consumed in a fixed order per
generation (selection, crossover, mutation), so a run is reproducible for
a given seed no matter how fitness evaluation is scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng as rng_mod
from .closed_form import closed_form_rates
from .scenario import ScenarioConfig


@dataclass(frozen=True)
class GaParams:
    """GA settings.

    Attributes
    ----------
    N_tot : int
        Population size.
    N_e : int
        Number of elites copied unchanged; ``N_tot - N_e`` must be even.
    p_c, p_m : float
        Crossover and per-gene mutation probabilities.
    t_T : int
        Maximum number of generations.
    f_T : float
        Stop as soon as the best fitness exceeds this value.
    bits : int or None
        Phase resolution B for discrete optimization; ``None`` is continuous.
    seed : int
    fitness_mode : {"closed", "mc"}
        ``"mc"`` uses Monte Carlo rates and exists for validation only.
    mc_realizations : int
        Realizations per evaluation when ``fitness_mode == "mc"``.
    """

    N_tot: int = 200
    N_e: int = 10
    p_c: float = 0.4
    p_m: float = 0.1
    t_T: int = 2000
    f_T: float = math.inf
    bits: int | None = None
    seed: int = 0
    fitness_mode: str = "closed"
    mc_realizations: int = 200

    def __post_init__(self):
        if self.N_tot < 2 or not 0 <= self.N_e < self.N_tot:
            raise ValueError("need N_tot >= 2 and 0 <= N_e < N_tot")
        if (self.N_tot - self.N_e) % 2:
            raise ValueError("N_tot - N_e must be even: children are produced in pairs")
        if not (0 <= self.p_c <= 1 and 0 <= self.p_m <= 1):
            raise ValueError("p_c and p_m must lie in [0, 1]")
        if self.t_T < 1:
            raise ValueError("t_T must be >= 1")
        if self.bits is not None and (int(self.bits) != self.bits or self.bits < 1):
            raise ValueError("bits must be a positive integer or None")
        if self.fitness_mode not in ("closed", "mc"):
            raise ValueError("fitness_mode must be 'closed' or 'mc'")

    @property
    def levels(self) -> int | None:
        return None if self.bits is None else 2 ** int(self.bits)


@dataclass
class Individual:
    """A chromosome of N genes and its fitness (sum rate, bits/s/Hz)."""

    genes: np.ndarray
    fitness: float = float("nan")


@dataclass
class GaResult:
    """Best phases found, their sum rate and the best fitness per generation."""

    theta: np.ndarray
    sum_rate: float
    history: list[float] = field(default_factory=list)
    genes: np.ndarray | None = None


def phases_from_genes(genes, levels: int | None = None) -> np.ndarray:
    """Map genes to phases; integer levels become ``level * 2 pi / levels``."""
    genes = np.asarray(genes)
    if levels is None:
        return genes.astype(float)
    return genes * (2 * np.pi / levels)


def random_genes(rng: np.random.Generator, shape, levels: int | None = None) -> np.ndarray:
    """Uniform genes over the continuous or discrete domain."""
    if levels is None:
        return rng.uniform(0.0, 2 * np.pi, shape)
    return rng.integers(0, levels, shape)


def population_fitness(genes, scenario: ScenarioConfig, levels: int | None = None,
                       mode: str = "closed", mc_realizations: int = 200) -> np.ndarray:
    """Sum rate of each chromosome in ``genes`` (shape ``(..., N)``)."""
    phases = phases_from_genes(genes, levels)
    if mode == "closed":
        return closed_form_rates(scenario, phases).sum(axis=-1)
    from .mc_rate import ergodic_rate_mc

    flat = phases.reshape(-1, scenario.N)
    vals = [ergodic_rate_mc(scenario, th, T=mc_realizations).sum_rate for th in flat]
    return np.asarray(vals).reshape(phases.shape[:-1])


def fitness(individual: Individual | np.ndarray, scenario: ScenarioConfig, levels: int | None = None) -> float:
    """Closed-form sum rate of one chromosome."""
    genes = individual.genes if isinstance(individual, Individual) else individual
    return float(population_fitness(genes, scenario, levels))


def scale_fitness(f) -> np.ndarray:
    """Normalize fitness to selection probabilities.

    An all-zero population gets uniform probabilities.
    """
    f = np.asarray(f, dtype=float)
    if f.size == 0:
        raise ValueError("empty population")
    if np.any(f < 0):
        raise ValueError("fitness must be non-negative")
    total = f.sum()
    if total <= 0:
        return np.full(f.size, 1.0 / f.size)
    return f / total


def roulette_index(scaled, c):
    """Index of the first individual whose cumulative scaled fitness reaches ``c``."""
    cum = np.cumsum(scaled)
    idx = np.searchsorted(cum, c, side="left")
    return np.minimum(idx, len(cum) - 1)


def select(scaled, rng: np.random.Generator, size=None):
    """Roulette-wheel selection of one (or ``size``) parent indices."""
    if len(scaled) == 0:
        raise ValueError("empty population")
    c = rng.random(size)
    return roulette_index(scaled, c)


def crossover(parent1, parent2, p_c: float, rng: np.random.Generator):
    """Single-point crossover.

    With probability ``1 - p_c`` the children are copies of the parents.
    Otherwise a cut point ``ceil(c N)`` is drawn and the tails are swapped.
    Parents may be stacked along leading axes to process many pairs.
    """
    parent1 = np.asarray(parent1)
    parent2 = np.asarray(parent2)
    if parent1.shape != parent2.shape:
        raise ValueError("parents must have equal gene lengths")
    lead, N = parent1.shape[:-1], parent1.shape[-1]
    c1 = rng.random(lead)
    c2 = rng.random(lead)
    cut = np.ceil(c2 * N).astype(int)
    swap = (np.arange(N) >= np.asarray(cut)[..., None]) & (np.asarray(c1) <= p_c)[..., None]
    child1 = np.where(swap, parent2, parent1)
    child2 = np.where(swap, parent1, parent2)
    return child1, child2


def mutate(child, p_m: float, rng: np.random.Generator, levels: int | None = None) -> np.ndarray:
    """Resample each gene independently with probability ``p_m``."""
    child = np.asarray(child)
    mask = rng.random(child.shape) < p_m
    fresh = random_genes(rng, child.shape, levels)
    return np.where(mask, fresh, child)


def optimize(scenario: ScenarioConfig, params: GaParams | None = None) -> GaResult:
    """Run the GA and return the best phases found.

    Each generation: evaluate and sort the population, copy the ``N_e``
    best unchanged, then fill the rest with ``(N_tot - N_e) / 2`` pairs of
    roulette-selected parents, crossed over and mutated. The run stops after
    ``t_T`` generations or once the best fitness exceeds ``f_T``.
    """
    params = params or GaParams()
    levels = params.levels
    rng = rng_mod.stream(params.seed, "ga")
    N = scenario.N
    n_pairs = (params.N_tot - params.N_e) // 2

    pop = random_genes(rng, (params.N_tot, N), levels)
    history: list[float] = []
    t = 1
    while True:
        fit = population_fitness(pop, scenario, levels, params.fitness_mode, params.mc_realizations)
        order = np.argsort(-fit, kind="stable")
        pop, fit = pop[order], fit[order]
        history.append(float(fit[0]))
        if t >= params.t_T or fit[0] > params.f_T:
            break
        parents = select(scale_fitness(fit), rng, (n_pairs, 2))
        c1, c2 = crossover(pop[parents[:, 0]], pop[parents[:, 1]], params.p_c, rng)
        children = mutate(np.stack([c1, c2], axis=1).reshape(-1, N), params.p_m, rng, levels)
        pop = np.concatenate([pop[:params.N_e], children])
        t += 1

    return GaResult(theta=phases_from_genes(pop[0], levels), sum_rate=float(fit[0]), history=history,
                    genes=pop[0].copy())
