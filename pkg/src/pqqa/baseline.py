"""Reference solvers: exhaustive search, random greedy MIS, single-site
simulated annealing, and exact Boltzmann tables for tiny instances."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graphio import Graph
from .problems import DiscreteSolution, EnergyModel, Kind, enumerate_assignments


class InstanceTooLarge(ValueError):
    pass


def _check_size(model, limit_bits):
    if model.n * math.log2(model.arity) > limit_bits:
        raise InstanceTooLarge(f"{model.arity}^{model.n} assignments exceed 2^{limit_bits}")


def brute_force(model: EnergyModel) -> DiscreteSolution:
    """Global minimizer of the penalized energy; ties go to the lexicographically smallest."""
    _check_size(model, 24)
    best_e, best_x = np.inf, None
    for block in enumerate_assignments(model.arity, model.n):
        e = model.energy(block)
        k = int(np.argmin(e))
        if e[k] < best_e:
            best_e, best_x = e[k], block[k].copy()
    return model.solution(best_x)


def greedy_mis(graph: Graph, seed: int = 0) -> DiscreteSolution:
    """Random greedy MIS: take a minimum-degree node (random among ties), drop its neighbourhood."""
    rng = np.random.default_rng(seed)
    nbrs = [set(j for j, _ in row) for row in graph.neighbors()]
    alive = set(range(graph.n_nodes))
    deg = {v: len(nbrs[v]) for v in alive}
    x = np.zeros(graph.n_nodes, dtype=np.int64)
    while alive:
        low = min(deg[v] for v in alive)
        ties = sorted(v for v in alive if deg[v] == low)
        v = ties[rng.integers(len(ties))]
        x[v] = 1
        removed = (nbrs[v] & alive) | {v}
        alive -= removed
        for u in removed:
            for w in nbrs[u] & alive:
                deg[w] -= 1
    return EnergyModel(Kind.MIS, graph).solution(x)


# ---------------------------------------------------------------------------
# simulated annealing


@dataclass(frozen=True)
class SAConfig:
    steps: int = 100_000
    t_start: float = 1.0
    t_end: float = 0.01
    schedule: str = "geometric"
    seed: int = 0
    mode: str = "metropolis"

    def __post_init__(self):
        if not self.t_start >= self.t_end > 0:
            raise ValueError("need t_start >= t_end > 0")
        if self.schedule not in ("geometric", "linear"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.mode not in ("metropolis", "gibbs"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")


def temperature_at(cfg: SAConfig, k: int) -> float:
    frac = k / cfg.steps
    if cfg.schedule == "geometric":
        return cfg.t_start * (cfg.t_end / cfg.t_start) ** frac
    return cfg.t_start + (cfg.t_end - cfg.t_start) * frac


def metropolis_accept(delta: float, temperature: float, u: float) -> bool:
    """Accept with probability ``min(1, exp(-delta / T))`` given a uniform draw ``u``."""
    if delta <= 0:
        return True
    if temperature <= 0:
        return False
    return u < math.exp(-delta / temperature)


def qubo_terms(model: EnergyModel):
    """Binary energies as ``const + sum h_i x_i + sum_{i<j} J_ij x_i x_j``.

    Returns ``(const, h, nbrs)`` with ``nbrs[i]`` a list of ``(j, J_ij)``.
    """
    n, g = model.n, model.graph
    nbrs = [[] for _ in range(n)]
    if model.kind is Kind.MIS:
        h = -model.node_weights.copy()
        for i, j, _ in g.edges:
            nbrs[i].append((j, model.lam))
            nbrs[j].append((i, model.lam))
    elif model.kind is Kind.CLIQUE:
        h = -model.node_weights.copy()
        for i, j, _ in g.complement().edges:
            nbrs[i].append((j, model.lam))
            nbrs[j].append((i, model.lam))
    elif model.kind is Kind.MAXCUT:
        h = np.zeros(n)
        for i, j, w in g.edges:
            h[i] -= w
            h[j] -= w
            nbrs[i].append((j, 2.0 * w))
            nbrs[j].append((i, 2.0 * w))
    else:
        raise ValueError(f"{model.kind.value} is not a binary problem")
    return 0.0, h, nbrs


def _binary_sa(model, cfg, x, rng, audit):
    const, h, nbrs = qubo_terms(model)
    n = model.n
    x = [int(v) for v in x]
    field = [h[i] + sum(J * x[j] for j, J in nbrs[i]) for i in range(n)]
    energy = float(model.energy(np.array(x)))
    best_e, best_x = energy, list(x)
    chunk = 1 << 14
    gibbs = cfg.mode == "gibbs"
    for start in range(0, cfg.steps, chunk):
        size = min(chunk, cfg.steps - start)
        sites = rng.integers(n, size=size).tolist()
        draws = rng.random(size).tolist()
        for k in range(size):
            i = sites[k]
            T = temperature_at(cfg, start + k)
            delta = field[i] if x[i] == 0 else -field[i]
            if gibbs:
                # heat-bath: flipped state has conditional probability 1 / (1 + e^{delta/T})
                z = min(delta / T, 700.0)
                accept = draws[k] < 1.0 / (1.0 + math.exp(z))
            else:
                accept = metropolis_accept(delta, T, draws[k])
            if not accept:
                continue
            d = 1 - 2 * x[i]
            x[i] += d
            energy += delta
            for j, J in nbrs[i]:
                field[j] += J * d
            if audit:
                full = float(model.energy(np.array(x)))
                if abs(full - energy) > 1e-9 * max(1.0, abs(full)):
                    raise AssertionError(f"incremental energy {energy} != recomputed {full}")
            if energy < best_e - 1e-12:
                best_e, best_x = energy, list(x)
    return best_x


def _categorical_sa(model, cfg, x, rng, audit):
    n, k = model.n, model.arity
    nbrs = model.graph.neighbors()
    x = [int(v) for v in x]
    counts = [[0.0] * k for _ in range(n)]
    for i in range(n):
        for j, w in nbrs[i]:
            counts[i][x[j]] += w
    sizes = [0] * k
    for v in x:
        sizes[v] += 1
    partition = model.kind is Kind.PARTITION
    lam = model.lam

    def delta_of(i, a, b):
        if partition:
            return 2.0 * (counts[i][a] - counts[i][b]) + lam * (2.0 * (sizes[b] - sizes[a]) + 2.0)
        return counts[i][b] - counts[i][a]

    energy = float(model.energy(np.array(x)))
    best_e, best_x = energy, list(x)
    chunk = 1 << 14
    gibbs = cfg.mode == "gibbs"
    for start in range(0, cfg.steps, chunk):
        size = min(chunk, cfg.steps - start)
        sites = rng.integers(n, size=size).tolist()
        shifts = rng.integers(1, k, size=size).tolist()
        draws = rng.random(size).tolist()
        for step in range(size):
            i = sites[step]
            a = x[i]
            T = temperature_at(cfg, start + step)
            if gibbs:
                deltas = [delta_of(i, a, c) if c != a else 0.0 for c in range(k)]
                lo = min(deltas)
                weights = [math.exp(-(d - lo) / T) for d in deltas]
                r = draws[step] * sum(weights)
                b = 0
                while b < k - 1 and r >= weights[b]:
                    r -= weights[b]
                    b += 1
                if b == a:
                    continue
                delta = deltas[b]
            else:
                b = (a + shifts[step]) % k
                delta = delta_of(i, a, b)
                if not metropolis_accept(delta, T, draws[step]):
                    continue
            x[i] = b
            sizes[a] -= 1
            sizes[b] += 1
            for j, w in nbrs[i]:
                counts[j][a] -= w
                counts[j][b] += w
            energy += delta
            if audit:
                full = float(model.energy(np.array(x)))
                if abs(full - energy) > 1e-9 * max(1.0, abs(full)):
                    raise AssertionError(f"incremental energy {energy} != recomputed {full}")
            if energy < best_e - 1e-12:
                best_e, best_x = energy, list(x)
    return best_x


def sa_solve(model: EnergyModel, cfg: SAConfig = SAConfig(), x0=None, audit: bool = False) -> DiscreteSolution:
    """Single-site simulated annealing; returns the best state visited.

    Binary problems flip one bit, categorical ones move one node to another
    label chosen uniformly. ``audit`` recomputes the full energy after every
    accepted move and raises on any drift of the incremental bookkeeping.
    """
    rng = np.random.default_rng(cfg.seed)
    if x0 is None:
        x0 = rng.integers(model.arity, size=model.n)
    x0 = model.check_assignment(x0)
    if model.n == 0:
        return model.solution(x0)
    body = _categorical_sa if model.categorical else _binary_sa
    return model.solution(np.array(body(model, cfg, x0, rng, audit), dtype=np.int64))


# ---------------------------------------------------------------------------
# exact Boltzmann tables


@dataclass
class BoltzmannTable:
    assignments: np.ndarray
    energies: np.ndarray
    probs: np.ndarray
    log_partition: float
    temperature: float

    def mass_on(self, mask) -> float:
        return float(self.probs[mask].sum())


def boltzmann_enumerate(model: EnergyModel, temperature: float, max_bits: int = 20) -> BoltzmannTable:
    """Exact ``p(x) = exp(-l(x)/T) / Z`` over every assignment."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    _check_size(model, max_bits)
    xs = np.concatenate(list(enumerate_assignments(model.arity, model.n)))
    e = np.asarray(model.energy(xs), dtype=np.float64)
    logits = -e / temperature
    top = logits.max()
    w = np.exp(logits - top)
    z = w.sum()
    return BoltzmannTable(xs, e, w / z, float(top + np.log(z)), temperature)


def optimal_mask(table: BoltzmannTable, tol: float = 1e-9) -> np.ndarray:
    return table.energies <= table.energies.min() + tol


def reference_value(model: EnergyModel, limit_nodes: int = 20) -> Optional[float]:
    """Exact optimum of the raw objective when the instance is small enough, else None."""
    if model.arity**model.n > 2**limit_nodes:
        return None
    return brute_force(model).objective
