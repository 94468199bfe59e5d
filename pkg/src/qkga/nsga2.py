"""NSGA-II over bit-string chromosomes.

Both objectives are minimised. Variation follows the feature-map search setup:
a fixed number of offspring per generation, a fraction produced by single-point
crossover and the rest copied from the mating pool, each offspring mutated with
some probability by flipping a fixed fraction of its bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .encoding import Chromosome, random_chromosome

Fitness = tuple[float, float]
Evaluator = Callable[[Chromosome], Fitness]


class EvaluationError(RuntimeError):
    def __init__(self, bits: str, cause: BaseException):
        super().__init__(f"evaluation failed for individual {bits}: {cause!r}")
        self.bits = bits


@dataclass
class GaConfig:
    population_size: int = 100
    offspring_per_generation: int = 15
    crossover_fraction: float = 0.3
    mutation_probability: float = 0.7
    mutation_bit_fraction: float = 0.2
    generations: int = 1200
    seed: int = 0
    qubits: int = 6
    layers: int = 6
    use_cache: bool = True

    def validate(self) -> list[str]:
        errors = []
        for name in ("crossover_fraction", "mutation_probability", "mutation_bit_fraction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                errors.append(f"{name} must lie in [0, 1]")
        for name in ("population_size", "offspring_per_generation", "qubits", "layers"):
            if getattr(self, name) < 1:
                errors.append(f"{name} must be positive")
        if self.generations < 0:
            errors.append("generations must be non-negative")
        return errors


@dataclass
class Individual:
    chromosome: Chromosome
    fitness: Optional[Fitness] = None
    rank: Optional[int] = None
    crowding: Optional[float] = None

    @property
    def bits(self) -> str:
        return self.chromosome.bits


@dataclass
class GaResult:
    population: list[Individual]
    history: list[dict] = field(default_factory=list)
    evaluations: int = 0
    cache_hits: int = 0


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def non_dominated_sort(fitnesses) -> list[list[int]]:
    F = np.asarray(fitnesses, dtype=float)
    n = F.shape[0]
    if n == 0:
        return []
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    remaining = dom.sum(axis=0)
    assigned = np.zeros(n, dtype=bool)
    fronts = []
    current = np.flatnonzero(remaining == 0)
    while current.size:
        fronts.append(current.tolist())
        assigned[current] = True
        remaining = remaining - dom[current].sum(axis=0)
        current = np.flatnonzero((remaining == 0) & ~assigned)
    return fronts


def crowding_distance(front_fitnesses) -> np.ndarray:
    F = np.asarray(front_fitnesses, dtype=float)
    n, m = F.shape
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = np.inf
        return dist
    for k in range(m):
        order = np.argsort(F[:, k], kind="stable")
        vals = F[order, k]
        dist[order[0]] = dist[order[-1]] = np.inf
        span = vals[-1] - vals[0]
        if span > 0:
            dist[order[1:-1]] += (vals[2:] - vals[:-2]) / span
    return dist


def assign_rank_and_crowding(population: list[Individual]) -> list[list[int]]:
    fronts = non_dominated_sort([ind.fitness for ind in population])
    for r, front in enumerate(fronts):
        cd = crowding_distance([population[i].fitness for i in front])
        for i, d in zip(front, cd):
            population[i].rank = r
            population[i].crowding = float(d)
    return fronts


def survive(candidates: list[Individual], size: int) -> list[Individual]:
    """Elitist truncation: whole fronts first, then the last front by crowding."""
    fronts = non_dominated_sort([ind.fitness for ind in candidates])
    chosen: list[int] = []
    for front in fronts:
        if len(chosen) + len(front) <= size:
            chosen.extend(front)
            continue
        cd = crowding_distance([candidates[i].fitness for i in front])
        order = np.argsort(-cd, kind="stable")
        chosen.extend(front[k] for k in order[: size - len(chosen)])
        break
    survivors = [candidates[i] for i in chosen]
    assign_rank_and_crowding(survivors)
    return survivors


class Nsga2:
    """Stateful driver holding the fitness cache and counters for one run."""

    def __init__(self, config: GaConfig, evaluator: Evaluator):
        self.config = config
        self.evaluator = evaluator
        self.rng = np.random.default_rng(config.seed)
        self.cache: dict[str, Fitness] = {}
        self.evaluations = 0
        self.cache_hits = 0

    def evaluate(self, ind: Individual) -> None:
        self.evaluations += 1
        if self.config.use_cache and ind.bits in self.cache:
            self.cache_hits += 1
            ind.fitness = self.cache[ind.bits]
            return
        try:
            fit = tuple(float(v) for v in self.evaluator(ind.chromosome))
        except Exception as exc:
            raise EvaluationError(ind.bits, exc) from exc
        if self.config.use_cache:
            self.cache[ind.bits] = fit
        ind.fitness = fit

    def _tournament(self, population: list[Individual]) -> int:
        a, b = self.rng.integers(0, len(population), size=2)
        pa, pb = population[a], population[b]
        if pa.rank != pb.rank:
            return int(a if pa.rank < pb.rank else b)
        if pa.crowding != pb.crowding:
            return int(a if pa.crowding > pb.crowding else b)
        return int(min(a, b))

    def make_offspring(self, population: list[Individual]) -> list[Individual]:
        cfg = self.config
        rng = self.rng
        n_off = cfg.offspring_per_generation
        pool = [population[self._tournament(population)] for _ in range(2 * n_off)]
        n_cx = min(n_off, _round_half_up(cfg.crossover_fraction * n_off))
        M, N = population[0].chromosome.qubits, population[0].chromosome.layers
        L = len(pool[0].bits)
        children = []
        for k in range(n_cx):
            p1, p2 = pool[2 * k].bits, pool[2 * k + 1].bits
            cut = int(rng.integers(1, L)) if L > 1 else 0
            children.append(p1[:cut] + p2[cut:])
        for _ in range(n_off - n_cx):
            children.append(pool[int(rng.integers(0, len(pool)))].bits)
        n_flip = _round_half_up(cfg.mutation_bit_fraction * L)
        out = []
        for bits in children:
            if n_flip and rng.random() < cfg.mutation_probability:
                arr = np.frombuffer(bits.encode(), dtype=np.uint8).copy()
                idx = rng.choice(L, size=n_flip, replace=False)
                arr[idx] ^= 1  # '0' (48) <-> '1' (49)
                bits = arr.tobytes().decode()
            out.append(Individual(Chromosome(bits, M, N)))
        return out

    def step(self, population: list[Individual]) -> list[Individual]:
        offspring = self.make_offspring(population)
        for ind in offspring:
            self.evaluate(ind)
        return survive(population + offspring, self.config.population_size)

    def initial_population(self) -> list[Individual]:
        cfg = self.config
        pop = [Individual(random_chromosome(self.rng, cfg.qubits, cfg.layers))
               for _ in range(cfg.population_size)]
        for ind in pop:
            self.evaluate(ind)
        assign_rank_and_crowding(pop)
        return pop

    def stats(self, generation: int, population: list[Individual]) -> dict:
        F = np.array([ind.fitness for ind in population])
        return {
            "generation": generation,
            "best_objectives": [float(v) for v in F.min(axis=0)],
            "front0_size": int(sum(ind.rank == 0 for ind in population)),
            "evaluations": self.evaluations,
            "cache_hits": self.cache_hits,
            "kernel_evaluations": int(getattr(self.evaluator, "kernel_evaluations", 0)),
        }


def run(config: GaConfig, evaluator: Evaluator,
        on_generation: Optional[Callable[[dict], None]] = None) -> GaResult:
    """Evaluate a random population, then evolve it.

    The initial population counts as the first generation, so ``generations``
    generations cost ``pop + offspring * (generations - 1)`` evaluation slots.
    """
    errors = config.validate()
    if errors:
        raise ValueError("; ".join(errors))
    ga = Nsga2(config, evaluator)
    population = ga.initial_population()
    history = [ga.stats(1, population)]
    if on_generation:
        on_generation(history[-1])
    for gen in range(2, config.generations + 1):
        population = ga.step(population)
        history.append(ga.stats(gen, population))
        if on_generation:
            on_generation(history[-1])
    return GaResult(population, history, ga.evaluations, ga.cache_hits)
