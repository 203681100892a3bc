"""Penalized energies, their polynomial relaxations and solution metrics.

Binary problems (MIS, max clique, max cut) take assignments of shape
``(..., N)``; categorical problems (balanced partition, coloring) take integer
labels of shape ``(..., N)`` and relax to probability rows of shape
``(..., N, K)``. Leading axes are batch axes (parallel runs); every function
returns one value per batch entry.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .graphio import Graph

DENSE_LIMIT = 4096
DEFAULT_LAMBDA = {"mis": 2.0, "clique": 2.0, "maxcut": 0.0, "partition": 1.0, "coloring": 0.0}


class Kind(str, enum.Enum):
    MIS = "mis"
    CLIQUE = "clique"
    MAXCUT = "maxcut"
    PARTITION = "partition"
    COLORING = "coloring"

    @property
    def categorical(self) -> bool:
        return self in (Kind.PARTITION, Kind.COLORING)

    @property
    def maximize(self) -> bool:
        """Sense of the raw objective reported to users."""
        return self in (Kind.MIS, Kind.CLIQUE, Kind.MAXCUT)


@dataclass(frozen=True, eq=False)
class EnergyModel:
    """A problem instance: graph, penalty weight and (for categorical kinds) arity.

    ``arity`` is 2 for binary kinds and the number of parts / colors otherwise.
    MIS and clique penalties use the unweighted structure of the graph; max
    cut, partition and coloring use edge weights.
    """

    kind: Kind
    graph: Graph
    lam: float = None
    node_weights: np.ndarray = None
    arity: int = 2

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.lam is None:
            object.__setattr__(self, "lam", DEFAULT_LAMBDA[self.kind.value])
        if self.lam < 0:
            raise ValueError("penalty weight must be non-negative")
        c = np.ones(self.graph.n_nodes) if self.node_weights is None else np.asarray(self.node_weights, float)
        if c.shape != (self.graph.n_nodes,):
            raise ValueError("node_weights must have one entry per node")
        object.__setattr__(self, "node_weights", c)
        if self.kind.categorical:
            if self.arity < 2:
                raise ValueError("categorical problems need arity >= 2")
        elif self.arity != 2:
            raise ValueError(f"{self.kind.value} is binary; arity must be 2")

    @property
    def n(self) -> int:
        return self.graph.n_nodes

    @property
    def categorical(self) -> bool:
        return self.kind.categorical

    def with_lambda(self, lam) -> "EnergyModel":
        return EnergyModel(self.kind, self.graph, lam, self.node_weights, self.arity)

    # -- linear algebra helpers -------------------------------------------

    @cached_property
    def _weighted(self):
        a = self.graph.adjacency
        return a.toarray() if self.n <= DENSE_LIMIT else a

    @cached_property
    def _unit(self):
        a = self.graph.structure
        return a.toarray() if self.n <= DENSE_LIMIT else a

    @cached_property
    def _wdeg(self) -> np.ndarray:
        return np.asarray(self.graph.adjacency.sum(axis=1)).ravel()

    def _apply(self, mat, p):
        """Multiply the symmetric matrix ``mat`` into the node axis of ``p``."""
        node_axis = -2 if self.categorical else -1
        if not sp.issparse(mat):
            return p @ mat if node_axis == -1 else mat @ p
        moved = np.moveaxis(p, node_axis, 0)
        out = mat @ moved.reshape(self.n, -1)
        return np.moveaxis(out.reshape(moved.shape), 0, node_axis)

    # -- discrete ----------------------------------------------------------

    def check_assignment(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[-1] != self.n:
            raise ValueError(f"assignment has {x.shape[-1]} entries, graph has {self.n} nodes")
        if x.size and (x.min() < 0 or x.max() >= self.arity):
            raise ValueError(f"assignment entries must lie in [0, {self.arity})")
        return x.astype(np.int64, copy=False)

    def energy(self, x):
        """Penalized discrete energy (lower is better)."""
        return _ENERGY[self.kind](x, self)

    def objective(self, x):
        """Raw problem objective: set/clique size, cut weight, cut edges, or conflicts."""
        x = self.check_assignment(x)
        g = self.graph
        xi, xj = x[..., g.src], x[..., g.dst]
        if self.kind in (Kind.MIS, Kind.CLIQUE):
            return x @ self.node_weights
        if self.kind is Kind.COLORING:
            return (xi == xj).astype(float) @ g.weight
        return (xi != xj).astype(float) @ g.weight

    def violation(self, x):
        """Constraint violation; zero exactly for feasible assignments."""
        x = self.check_assignment(x)
        g = self.graph
        xi, xj = x[..., g.src], x[..., g.dst]
        if self.kind is Kind.MIS:
            return np.sum(xi * xj, axis=-1).astype(float)
        if self.kind is Kind.CLIQUE:
            size = x.sum(axis=-1)
            return (size * (size - 1) / 2 - np.sum(xi * xj, axis=-1)).astype(float)
        if self.kind is Kind.MAXCUT:
            return np.zeros(x.shape[:-1])
        if self.kind is Kind.COLORING:
            return np.sum(xi == xj, axis=-1).astype(float)
        counts = part_sizes(x, self.arity)
        lo, hi = self.n // self.arity, -(-self.n // self.arity)
        return (np.maximum(lo - counts, 0) + np.maximum(counts - hi, 0)).sum(axis=-1).astype(float)

    def solution(self, x) -> "DiscreteSolution":
        x = self.check_assignment(np.asarray(x))
        viol = float(self.violation(x))
        return DiscreteSolution(
            assignment=x.copy(),
            objective=float(self.objective(x)),
            penalty_violation=viol,
            feasible=viol == 0.0,
            energy=float(self.energy(x)),
        )

    # -- relaxed -----------------------------------------------------------

    def _check_relaxed(self, p):
        p = np.asarray(p, dtype=np.float64)
        if self.categorical:
            if p.ndim < 2 or p.shape[-2:] != (self.n, self.arity):
                raise ValueError(f"relaxed input must end in shape ({self.n}, {self.arity}), got {p.shape}")
        elif p.shape[-1:] != (self.n,):
            raise ValueError(f"relaxed input must end in length {self.n}, got {p.shape}")
        return p

    def relaxed_energy(self, p):
        """Polynomial relaxation; equals :meth:`energy` at integral / one-hot points."""
        p = self._check_relaxed(p)
        lam, c, kind = self.lam, self.node_weights, self.kind
        if kind is Kind.MIS:
            return -p @ c + 0.5 * lam * np.sum(p * self._apply(self._unit, p), axis=-1)
        if kind is Kind.CLIQUE:
            tot = p.sum(axis=-1)
            inside = np.sum(p * self._apply(self._unit, p), axis=-1)
            return -p @ c + 0.5 * lam * (tot * (tot - 1) - inside)
        if kind is Kind.MAXCUT:
            q = 2.0 * p - 1.0
            return -0.5 * self.graph.weight.sum() + 0.25 * np.sum(q * self._apply(self._weighted, q), axis=-1)
        ap = self._apply(self._weighted, p)
        if kind is Kind.COLORING:
            return 0.5 * np.sum(p * ap, axis=(-2, -1))
        # partition: cut double sum plus balance penalty
        cut = np.sum(p * (self._wdeg[:, None] - ap), axis=(-2, -1))
        gap = self.n / self.arity - p.sum(axis=-2)
        return cut + lam * np.sum(gap**2, axis=-1)

    def relaxed_grad(self, p):
        """Exact gradient of :meth:`relaxed_energy` with respect to ``p``."""
        p = self._check_relaxed(p)
        lam, kind = self.lam, self.kind
        if kind is Kind.MIS:
            g = self._apply(self._unit, p)
            g *= lam
            g -= self.node_weights
            return g
        if kind is Kind.CLIQUE:
            g = self._apply(self._unit, p)
            g *= -lam
            g += lam * (p.sum(axis=-1, keepdims=True) - 0.5) - self.node_weights
            return g
        if kind is Kind.MAXCUT:
            return self._apply(self._weighted, 2.0 * p - 1.0)
        ap = self._apply(self._weighted, p)
        if kind is Kind.COLORING:
            return ap
        gap = self.n / self.arity - p.sum(axis=-2, keepdims=True)
        return self._wdeg[:, None] - 2.0 * ap - 2.0 * lam * gap


# ---------------------------------------------------------------------------
# discrete energies written directly from the edge sums


def _binary(x, model):
    return model.check_assignment(x).astype(np.float64)


def energy_mis(x, model: EnergyModel):
    """``-c.x + lam * x^T A x / 2`` with A the 0/1 adjacency."""
    x = _binary(x, model)
    g = model.graph
    both = np.sum(x[..., g.src] * x[..., g.dst], axis=-1)
    return -x @ model.node_weights + model.lam * both


def energy_clique(x, model: EnergyModel):
    """``-c.x + lam/2 * (|x|(|x|-1) - x^T A x)``: penalizes selected non-edges."""
    x = _binary(x, model)
    g = model.graph
    size = x.sum(axis=-1)
    inside = 2.0 * np.sum(x[..., g.src] * x[..., g.dst], axis=-1)
    return -x @ model.node_weights + 0.5 * model.lam * (size * (size - 1) - inside)


def energy_maxcut(x, model: EnergyModel):
    x = _binary(x, model)
    g = model.graph
    si, sj = 2 * x[..., g.src] - 1, 2 * x[..., g.dst] - 1
    return -((1 - si * sj) / 2) @ g.weight


def energy_partition(x, model: EnergyModel):
    """Cut counted once per incident part (twice per cut edge) plus balance penalty."""
    x = model.check_assignment(x)
    g = model.graph
    k = model.arity
    xi, xj = x[..., g.src], x[..., g.dst]
    cut = np.zeros(x.shape[:-1])
    for s in range(k):
        hit = (xi != xj) & ((xi == s) | (xj == s))
        cut = cut + hit.astype(float) @ g.weight
    balance = np.sum((model.n / k - part_sizes(x, k)) ** 2, axis=-1)
    return cut + model.lam * balance


def energy_coloring(x, model: EnergyModel):
    """Weighted count of monochromatic edges."""
    x = model.check_assignment(x)
    g = model.graph
    return (x[..., g.src] == x[..., g.dst]).astype(float) @ g.weight


_ENERGY = {
    Kind.MIS: energy_mis,
    Kind.CLIQUE: energy_clique,
    Kind.MAXCUT: energy_maxcut,
    Kind.PARTITION: energy_partition,
    Kind.COLORING: energy_coloring,
}


def relaxed_energy(p, model: EnergyModel):
    return model.relaxed_energy(p)


def relaxed_grad(p, model: EnergyModel):
    return model.relaxed_grad(p)


def part_sizes(x, k):
    x = np.asarray(x)
    return np.stack([(x == s).sum(axis=-1) for s in range(k)], axis=-1)


def one_hot(x, k):
    return np.eye(k)[np.asarray(x)]


# ---------------------------------------------------------------------------
# solutions and metrics


@dataclass
class DiscreteSolution:
    assignment: np.ndarray
    objective: float
    penalty_violation: float
    feasible: bool
    energy: float = float("nan")

    def to_dict(self):
        return {
            "assignment": self.assignment.tolist(),
            "objective": self.objective,
            "energy": self.energy,
            "penalty_violation": self.penalty_violation,
            "feasible": self.feasible,
        }


@dataclass
class Metrics:
    apr: Optional[float] = None
    cut_ratio: Optional[float] = None
    edge_cut_ratio: Optional[float] = None
    balanceness: Optional[float] = None
    conflicts: Optional[int] = None
    is_density: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "apr": self.apr,
            "cut_ratio": self.cut_ratio,
            "edge_cut_ratio": self.edge_cut_ratio,
            "balanceness": self.balanceness,
            "conflicts": self.conflicts,
            "is_density": self.is_density,
        }


def balanceness(x, k) -> float:
    """``1 - sum_s (1/k - n_s/N)^2``."""
    x = np.asarray(x)
    frac = part_sizes(x, k) / x.shape[-1]
    return float(1.0 - np.sum((1.0 / k - frac) ** 2))


def compute_metrics(sol: DiscreteSolution, model: EnergyModel, reference=None) -> Metrics:
    """Problem-specific quality metrics; ApR is obtained / reference."""
    x = sol.assignment
    n = model.n
    m = Metrics()
    if reference is not None and reference != 0:
        m.apr = float(sol.objective / reference)
    kind = model.kind
    if kind is Kind.MIS:
        m.is_density = float(x.sum() / n) if n else 0.0
    elif kind is Kind.MAXCUT:
        g = model.graph
        m.cut_ratio = float(np.sum(x[g.src] != x[g.dst]) / n) if n else 0.0
    elif kind is Kind.PARTITION:
        g = model.graph
        cut = int(np.sum(x[g.src] != x[g.dst]))
        m.edge_cut_ratio = cut / g.n_edges if g.n_edges else 0.0
        m.balanceness = balanceness(x, model.arity)
    elif kind is Kind.COLORING:
        g = model.graph
        m.conflicts = int(np.sum(x[g.src] == x[g.dst]))
    return m


# ---------------------------------------------------------------------------
# exhaustive helpers shared with the baseline oracles


def enumerate_assignments(arity: int, n: int, chunk: int = 1 << 16):
    """Yield all assignments in lexicographic order (node 0 most significant)."""
    total = arity**n
    powers = arity ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        yield (idx[:, None] // powers) % arity


def all_minimizers(model: EnergyModel, tol: float = 1e-9):
    """Every assignment attaining the minimum energy (small instances only)."""
    best, found = np.inf, []
    for block in enumerate_assignments(model.arity, model.n):
        e = model.energy(block)
        lo = e.min()
        if lo < best - tol:
            best, found = lo, [block[e <= lo + tol]]
        elif lo <= best + tol:
            found.append(block[e <= best + tol])
    return best, np.concatenate(found)


LAMBDA_GRID = tuple(0.5 * k for k in range(1, 21))


def select_lambda(model: EnergyModel, grid=LAMBDA_GRID, max_nodes: int = 20) -> float:
    """Smallest grid value whose exhaustive minimizers are all feasible.

    Falls back to the kind's default weight when the instance is too large
    to enumerate or no grid value works.
    """
    if model.arity**model.n > 2**max_nodes:
        return DEFAULT_LAMBDA[model.kind.value] or grid[0]
    for lam in grid:
        _, mins = all_minimizers(model.with_lambda(lam))
        if np.all(model.violation(mins) == 0):
            return float(lam)
    return DEFAULT_LAMBDA[model.kind.value] or grid[0]
