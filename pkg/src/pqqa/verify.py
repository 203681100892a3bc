"""Desk-scale oracle suites behind ``pqqa verify``.

Each suite returns a :class:`SuiteResult`; a failing check names the
invariant it broke so the summary can be read without the source.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .baseline import SAConfig, boltzmann_enumerate, brute_force, optimal_mask, sa_solve
from .graphio import Graph, gen_er
from .problems import EnergyModel, Kind, one_hot
from .relax import (
    CommConfig,
    EntropyConfig,
    comm_grad,
    comm_term,
    entropy_binary,
    entropy_binary_grad,
    entropy_kary,
    entropy_kary_grad,
)

GRAD_RTOL = 1e-5


@dataclass
class SuiteResult:
    name: str
    failures: list = field(default_factory=list)
    checks: int = 0
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self, ok: bool, invariant: str):
        self.checks += 1
        if not ok:
            self.failures.append(invariant)


def central_difference(f, x, h=1e-6):
    """Numerical gradient of scalar ``f`` at ``x`` (any shape)."""
    x = np.array(x, dtype=np.float64)
    g = np.empty_like(x)
    flat, gf = x.reshape(-1), g.reshape(-1)
    for k in range(flat.size):
        old = flat[k]
        flat[k] = old + h
        up = f(x)
        flat[k] = old - h
        down = f(x)
        flat[k] = old
        gf[k] = (up - down) / (2 * h)
    return g


def relative_error(approx, exact) -> float:
    approx, exact = np.ravel(approx), np.ravel(exact)
    return float(np.linalg.norm(approx - exact) / max(np.linalg.norm(exact), 1e-8))


def _weighted(graph: Graph, rng) -> Graph:
    return Graph(graph.n_nodes, graph.src, graph.dst, rng.uniform(0.5, 2.0, graph.n_edges))


def small_models(seed: int = 0, n: int = 7):
    """One small random instance per problem kind."""
    rng = np.random.default_rng(seed)
    g = gen_er(n, 0.45, seed)
    gw = _weighted(g, rng)
    return [
        EnergyModel(Kind.MIS, g),
        EnergyModel(Kind.CLIQUE, g),
        EnergyModel(Kind.MAXCUT, gw),
        EnergyModel(Kind.PARTITION, gw, arity=3),
        EnergyModel(Kind.COLORING, gw, arity=3),
    ]


def _interior(model, rng):
    if model.categorical:
        w = rng.uniform(0.05, 1.0, (model.n, model.arity))
        return w / w.sum(axis=1, keepdims=True)
    return rng.uniform(0.05, 0.95, model.n)


def suite_gradients(points: int = 50, seed: int = 0, corrupt: bool = False) -> SuiteResult:
    """Analytic gradients against central differences.

    ``corrupt`` perturbs every analytic relaxed gradient; it exists so the
    suite can be shown to fail.
    """
    res = SuiteResult("gradients")
    rng = np.random.default_rng(seed)
    for model in small_models(seed):
        worst = 0.0
        for _ in range(points):
            p = _interior(model, rng)
            g = model.relaxed_grad(p)
            if corrupt:
                g = g * 1.01 + 1e-3
            worst = max(worst, relative_error(central_difference(model.relaxed_energy, p), g))
        res.check(worst <= GRAD_RTOL, f"relaxed_grad({model.kind.value}) matches central differences (rel err {worst:.2e})")
    cfg = EntropyConfig()
    worst_b = worst_k = 0.0
    for _ in range(points):
        p = rng.uniform(0.05, 0.95, 6)
        worst_b = max(worst_b, relative_error(central_difference(lambda q: entropy_binary(q, cfg), p), entropy_binary_grad(p, cfg)))
        w = rng.uniform(0.05, 1.0, (4, 3))
        w /= w.sum(axis=1, keepdims=True)
        worst_k = max(worst_k, relative_error(central_difference(lambda q: entropy_kary(q, cfg), w), entropy_kary_grad(w, cfg)))
    res.check(worst_b <= GRAD_RTOL, f"entropy_binary_grad matches central differences (rel err {worst_b:.2e})")
    res.check(worst_k <= GRAD_RTOL, f"entropy_kary_grad matches central differences (rel err {worst_k:.2e})")
    comm = CommConfig(comm_strength=0.3)
    worst_c = 0.0
    for _ in range(points):
        P = rng.uniform(0.05, 0.95, (3, 4))
        worst_c = max(worst_c, relative_error(central_difference(lambda q: comm_term(q, comm), P), comm_grad(P, comm)))
    res.check(worst_c <= GRAD_RTOL, f"comm_grad matches central differences (rel err {worst_c:.2e})")
    return res


def suite_exactness(trials: int = 20, seed: int = 1) -> SuiteResult:
    """Relaxations agree with the discrete energies at integral points."""
    res = SuiteResult("exactness")
    rng = np.random.default_rng(seed)
    for model in small_models(seed):
        worst = 0.0
        for _ in range(trials):
            x = rng.integers(model.arity, size=model.n)
            p = one_hot(x, model.arity) if model.categorical else x.astype(float)
            worst = max(worst, abs(float(model.relaxed_energy(p)) - float(model.energy(x))))
        res.check(worst <= 1e-9, f"relaxed_energy({model.kind.value}) equals energy at integral points (gap {worst:.2e})")
    return res


def suite_kary_reduction(rows: int = 100, seed: int = 2) -> SuiteResult:
    """Two-category entropy coincides with the binary one on the first column."""
    res = SuiteResult("kary_reduction")
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.0, 1.0, rows)
    P = np.stack([p, 1.0 - p], axis=-1)
    worst = max(abs(float(entropy_kary(P[i : i + 1])) - float(entropy_binary(p[i : i + 1]))) for i in range(rows))
    res.check(worst <= 1e-12, f"entropy_kary with K=2 equals entropy_binary (gap {worst:.2e})")
    return res


def max_std_ensembles(S: int, N: int):
    """Exhaustive search over binary S x N ensembles for the largest summed column std."""
    best, argbest = -1.0, []
    for bits in itertools.product((0.0, 1.0), repeat=S * N):
        P = np.array(bits).reshape(S, N)
        val = float(P.std(axis=0).sum())
        if val > best + 1e-12:
            best, argbest = val, [P]
        elif abs(val - best) <= 1e-12:
            argbest.append(P)
    return best, argbest


def half_split_std(S: int) -> float:
    """Population std of a 0/1 column with floor(S/2) ones."""
    lo = S // 2
    mean = lo / S
    return float(np.sqrt(mean * (1 - mean)))


def suite_comm_extremes() -> SuiteResult:
    res = SuiteResult("comm_extremes")
    for S, N in ((4, 2), (5, 1)):
        best, arg = max_std_ensembles(S, N)
        split = all(int(col.sum()) in (S // 2, -(-S // 2)) for P in arg for col in P.T)
        res.check(split, f"S={S}: maximizers have floor/ceil(S/2) ones per column")
        res.check(abs(best - N * half_split_std(S)) <= 1e-12, f"S={S}, N={N}: maximum equals N * half-split std")
        var = (S * S - 1) / (4 * S * S) if S % 2 else 0.25
        res.check(abs(half_split_std(S) ** 2 - var) <= 1e-12, f"S={S}: half-split column variance equals the closed form")
    return res


def suite_boltzmann(instances: int = 10, seed: int = 3) -> SuiteResult:
    res = SuiteResult("boltzmann_limits")
    rng = np.random.default_rng(seed)
    for k in range(instances):
        n = int(rng.integers(4, 11))
        model = EnergyModel(Kind.MIS, gen_er(n, 0.35, seed + 100 * k), lam=2.0)
        cold = boltzmann_enumerate(model, 1e-3)
        mask = optimal_mask(cold)
        res.check(cold.mass_on(mask) >= 0.999, f"instance {k}: T=1e-3 puts >= 0.999 mass on the optimal set")
        opt = cold.probs[mask]
        res.check(float(opt.max() - opt.min()) <= 1e-6, f"instance {k}: T=1e-3 splits mass uniformly over optima")
        best = brute_force(model)
        res.check(bool(np.any(np.all(cold.assignments[mask] == best.assignment, axis=1))), f"instance {k}: brute-force optimum lies in the optimal set")
        hot = boltzmann_enumerate(model, 1e6)
        uniform = 1.0 / hot.probs.size
        res.check(float(np.abs(hot.probs - uniform).max()) <= 1e-4 * uniform, f"instance {k}: T=1e6 is uniform within 1e-4")
    return res


def suite_sa_audit(seed: int = 4) -> SuiteResult:
    res = SuiteResult("sa_audit")
    for model in small_models(seed, n=9):
        for mode in ("metropolis", "gibbs"):
            try:
                sa_solve(model, SAConfig(steps=3000, seed=seed, mode=mode), audit=True)
                ok = True
            except AssertionError:
                ok = False
            res.check(ok, f"sa_solve({model.kind.value}, {mode}) incremental energy matches recomputation")
    return res


SUITES = {
    "gradients": suite_gradients,
    "exactness": suite_exactness,
    "kary_reduction": suite_kary_reduction,
    "comm_extremes": suite_comm_extremes,
    "boltzmann_limits": suite_boltzmann,
    "sa_audit": suite_sa_audit,
}


def run_suites(names=None, corrupt_gradient: bool = False):
    results = []
    for name in names or SUITES:
        t0 = time.perf_counter()
        fn = SUITES[name]
        res = fn(corrupt=True) if (name == "gradients" and corrupt_gradient) else fn()
        res.seconds = time.perf_counter() - t0
        results.append(res)
    return results
