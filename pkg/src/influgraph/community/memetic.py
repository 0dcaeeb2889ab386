"""Memetic modularity maximisation.

A genetic algorithm over label vectors (tournament selection, overlap-matched
uniform crossover, neighbour-label mutation, elitism) in which every
offspring is refined by greedy vertex-move local search.

Randomness is drawn from per-offspring streams keyed on
``(rng_seed, generation, index)``, so results do not depend on how many
worker threads are used.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..graph import UndirectedGraph
from ..metrics import Partition, UndefinedModularityError, canonical_labels, modularity
from . import kernels

log = logging.getLogger(__name__)

# strict improvement threshold for "best Q improved"
IMPROVE_EPS = 1e-12
LPA_MAX_ITER = 20
# stream tag for the initial population (generation numbers start at 1)
_INIT = 0


@dataclass(frozen=True)
class MemeticConfig:
    population_size: int = 64
    max_generations: int = 200
    stagnation_limit: int = 30
    crossover_rate: float = 0.9
    mutation_rate: float = 0.05
    local_search_sweeps: int = 5
    elite_count: int = 2
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 4:
            raise ValueError("population_size must be >= 4")
        if not 1 <= self.elite_count < self.population_size:
            raise ValueError("elite_count must be in [1, population_size)")
        for name in ("crossover_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.max_generations < 0 or self.stagnation_limit < 1 or self.local_search_sweeps < 0:
            raise ValueError("generation, stagnation and sweep limits must be non-negative")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be an unsigned 64-bit integer")


@dataclass
class Individual:
    genotype: np.ndarray
    fitness: float = float("nan")
    clean: bool = False


@dataclass
class CommunityResult:
    partition: Partition
    q: float
    community_sizes: list[int]
    generations_run: int
    evaluations: int
    history: list[float] = field(default_factory=list)

    @property
    def community_count(self) -> int:
        return len(self.community_sizes)


class _Problem:
    """CSR arrays plus the evaluation counter shared by one solver run."""

    def __init__(self, g: UndirectedGraph):
        self.g = g
        self.n = g.n
        self.indptr = g.indptr
        self.indices = g.indices
        self.weights = g.weights
        self.strengths = g.strengths
        self.m = g.total_weight
        if self.m <= 0:
            raise UndefinedModularityError("graph has no edges (m = 0)")

    def fitness(self, labels: np.ndarray) -> float:
        return float(kernels.modularity_csr(self.indptr, self.indices, self.weights, self.strengths, self.m, labels))

    def local_search(self, labels: np.ndarray, order: np.ndarray, sweeps: int) -> tuple[int, bool, int]:
        return kernels.local_search_csr(
            self.indptr, self.indices, self.weights, self.strengths, self.m, labels, order, sweeps
        )

    def label_propagation(self, rng: np.random.Generator) -> np.ndarray:
        labels = np.arange(self.n, dtype=np.int64)
        for _ in range(LPA_MAX_ITER):
            order = rng.permutation(self.n)
            uniforms = rng.random(self.n)
            if kernels.label_propagation_sweep(self.indptr, self.indices, self.weights, labels, order, uniforms) == 0:
                break
        return labels


def _rng(seed: int, generation: int, index: int, stream: int = 0) -> np.random.Generator:
    key = [seed, generation, index] + ([stream] if stream else [])
    return np.random.default_rng(key)


def local_search(
    g: UndirectedGraph,
    individual: Individual,
    *,
    order: np.ndarray | None = None,
    max_sweeps: int = 5,
    rng: np.random.Generator | None = None,
) -> Individual:
    """Hill-climb ``individual`` by single-vertex moves; modularity never drops.

    Vertices are visited in ``order`` (a random permutation from ``rng`` when
    omitted), the same order on every sweep. Labels of the returned
    individual are canonical.
    """
    prob = _Problem(g)
    if order is None:
        order = (rng or np.random.default_rng()).permutation(g.n)
    labels = canonical_labels(individual.genotype)
    before = prob.fitness(labels)
    prob.local_search(labels, np.asarray(order, dtype=np.int64), max_sweeps)
    labels = canonical_labels(labels)
    after = prob.fitness(labels)
    assert after >= before - 1e-12, "local search decreased modularity"
    return Individual(labels, after, True)


def crossover(a: np.ndarray, b: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Uniform crossover after matching ``b``'s labels to ``a``'s by overlap.

    Label pairs are matched greedily in decreasing order of shared vertices
    (ties by smaller labels). Unmatched labels of ``b`` get fresh labels.
    """
    n = len(a)
    a = canonical_labels(a)
    b = canonical_labels(b)
    keys, counts = np.unique(a * n + b, return_counts=True)
    pa, pb = keys // n, keys % n
    order = np.lexsort((pb, pa, -counts))
    n_b = int(b.max()) + 1
    mapping = kernels.greedy_overlap_match(pa[order], pb[order], n_b)
    unmatched = mapping < 0
    mapping[unmatched] = n + np.arange(int(unmatched.sum()))
    b_mapped = mapping[b]
    take_a = rng.random(n) < 0.5
    return canonical_labels(np.where(take_a, a, b_mapped))


def mutate(g: UndirectedGraph, labels: np.ndarray, rate: float, rng: np.random.Generator) -> np.ndarray:
    """Reassign each vertex, with probability ``rate``, to a random neighbour's label."""
    n = g.n
    hit = rng.random(n) < rate
    pick = rng.random(n)
    deg = np.diff(g.indptr)
    hit &= deg > 0
    out = labels.copy()
    vs = np.flatnonzero(hit)
    if len(vs):
        slot = g.indptr[vs] + np.minimum((pick[vs] * deg[vs]).astype(np.int64), deg[vs] - 1)
        out[vs] = labels[g.indices[slot]]
    return out


class _Solver:
    def __init__(self, g: UndirectedGraph, cfg: MemeticConfig, workers: int, debug: bool):
        self.prob = _Problem(g)
        self.g = g
        self.cfg = cfg
        self.workers = max(1, int(workers))
        self.debug = debug

    def _refine(self, labels: np.ndarray, rng: np.random.Generator) -> tuple[Individual, int]:
        labels = canonical_labels(labels)
        order = rng.permutation(self.prob.n)
        _, _, evals = self.prob.local_search(labels, order, self.cfg.local_search_sweeps)
        labels = canonical_labels(labels)
        return Individual(labels, self.prob.fitness(labels), True), evals + 1

    def _initial(self, index: int) -> tuple[Individual, int]:
        rng = _rng(self.cfg.rng_seed, _INIT, index)
        if index == 0:
            labels = np.arange(self.prob.n, dtype=np.int64)
        else:
            labels = self.prob.label_propagation(rng)
        return self._refine(labels, rng)

    def _restart(self, index: int) -> tuple[Individual, int]:
        # random k-partition start for initial individuals that duplicate an earlier one;
        # on dense graphs label propagation collapses to a single community every time
        rng = _rng(self.cfg.rng_seed, _INIT, index, stream=1)
        n = self.prob.n
        k = int(rng.integers(2, max(2, math.isqrt(n)) + 1))
        return self._refine(rng.integers(0, k, n), rng)

    def _offspring(self, generation: int, index: int, population: list[Individual]) -> tuple[Individual, int]:
        rng = _rng(self.cfg.rng_seed, generation, index)
        p1 = self._tournament(population, rng)
        p2 = self._tournament(population, rng)
        if population[p2].fitness > population[p1].fitness:
            p1, p2 = p2, p1
        if p1 != p2 and rng.random() < self.cfg.crossover_rate:
            child = crossover(population[p1].genotype, population[p2].genotype, rng)
        else:
            child = population[p1].genotype.copy()
        child = mutate(self.g, child, self.cfg.mutation_rate, rng)
        return self._refine(child, rng)

    @staticmethod
    def _tournament(population: list[Individual], rng: np.random.Generator) -> int:
        i, j = rng.integers(len(population), size=2)
        fi, fj = population[i].fitness, population[j].fitness
        if fi > fj or (fi == fj and i <= j):
            return int(i)
        return int(j)

    def _map(self, fn, items) -> list:
        if self.workers == 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(self.workers) as pool:
            return list(pool.map(fn, items))

    def _check(self, population: list[Individual]) -> None:
        for ind in population:
            recomputed = modularity(self.g, Partition(ind.genotype))
            assert abs(recomputed - ind.fitness) <= 1e-12, (recomputed, ind.fitness)

    @staticmethod
    def _rank(population: list[Individual]) -> list[Individual]:
        # stable: equal fitness keeps earlier individuals first
        return sorted(population, key=lambda ind: -ind.fitness)

    def run(self) -> CommunityResult:
        cfg = self.cfg
        evaluations = 0
        results = self._map(self._initial, range(cfg.population_size))
        seen: set[bytes] = set()
        duplicates = []
        for i, (ind, _) in enumerate(results):
            key = ind.genotype.tobytes()
            if key in seen:
                duplicates.append(i)
            seen.add(key)
        evaluations += sum(e for _, e in results)
        for i, replacement in zip(duplicates, self._map(self._restart, duplicates)):
            results[i] = replacement
        evaluations += sum(results[i][1] for i in duplicates)
        population = self._rank([ind for ind, _ in results])
        best = population[0]
        history = [best.fitness]
        stale = 0
        generation = 0
        while generation < cfg.max_generations and stale < cfg.stagnation_limit:
            generation += 1
            if self.debug:
                self._check(population)
            n_children = cfg.population_size - cfg.elite_count
            results = self._map(lambda i: self._offspring(generation, i, population), range(n_children))
            evaluations += sum(e for _, e in results)
            population = self._rank(population[: cfg.elite_count] + [ind for ind, _ in results])
            if population[0].fitness > best.fitness + IMPROVE_EPS:
                best = population[0]
                stale = 0
            else:
                stale += 1
            history.append(best.fitness)
            log.debug("generation %d best Q %.6f", generation, best.fitness)

        labels = best.genotype.copy()
        # vertices without edges form their own communities; Q is unaffected
        isolated = np.flatnonzero(self.prob.strengths == 0)
        labels[isolated] = self.prob.n + isolated
        partition = Partition(canonical_labels(labels))
        q = modularity(self.g, partition)
        evaluations += 1
        return CommunityResult(
            partition=partition,
            q=q,
            community_sizes=partition.sizes(),
            generations_run=generation,
            evaluations=evaluations,
            history=history,
        )


def detect_communities(
    g: UndirectedGraph,
    cfg: MemeticConfig | None = None,
    *,
    workers: int = 1,
    debug: bool = False,
) -> CommunityResult:
    """Find a high-modularity disjoint partition of ``g``.

    The result depends only on ``g`` and ``cfg``; ``workers`` changes speed,
    not output. With ``debug`` every cached fitness is checked against a
    fresh modularity computation at each generation.
    """
    return _Solver(g, cfg or MemeticConfig(), workers, debug).run()
