"""Parallel quasi-quantum annealing engine.

Each step takes the gradient of the ensemble objective at the current relaxed
variables, applies one AdamW update directly to ``p``, adds Gaussian noise of
scale ``sqrt(2 * lr * T)`` and projects back onto ``[0, 1]`` (or the simplex).
The entropy coefficient gamma rises linearly from ``gamma_min`` to
``gamma_max``, first pulling variables towards 1/2 and then towards integral
values. Runs are rounded periodically and the best discrete solution seen so
far is kept per run.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .problems import DiscreteSolution, EnergyModel, Kind
from .relax import (
    CommConfig,
    EntropyConfig,
    RelaxedEnsemble,
    clamp_sigma,
    ensemble_grad,
    entropy_per_node,
    kary_sigma,
)


class SolverAbort(RuntimeError):
    """The dynamics produced a non-finite value."""


@dataclass(frozen=True)
class AnnealSchedule:
    total_steps: int = 3000
    gamma_min: float = -2.0
    gamma_max: float = 0.1
    temperature: float = 1e-3
    learning_rate: float = 0.1
    weight_decay: float = 0.01
    eval_interval: Optional[int] = None
    noise: bool = True
    init_delta: float = 0.1

    def __post_init__(self):
        if self.total_steps < 1:
            raise ValueError("total_steps must be >= 1")
        if not self.gamma_min <= self.gamma_max:
            raise ValueError("gamma_min must not exceed gamma_max")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.eval_interval is not None and self.eval_interval < 1:
            raise ValueError("eval_interval must be >= 1")

    @property
    def interval(self) -> int:
        if self.eval_interval is not None:
            return self.eval_interval
        return max(1, self.total_steps // 100)


@dataclass
class OptimizerState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, p, **kw):
        return cls(np.zeros_like(p), np.zeros_like(p), **kw)


# learning rates picked per problem from {1, 0.1, 0.01}
DEFAULT_LR = {Kind.MIS: 1.0, Kind.CLIQUE: 0.1, Kind.MAXCUT: 0.1, Kind.PARTITION: 0.1, Kind.COLORING: 0.1}


def default_schedule(kind, **overrides) -> AnnealSchedule:
    """Schedule with the tuned learning rate for ``kind``; keyword overrides win."""
    fields = {"learning_rate": DEFAULT_LR[Kind(kind)]}
    fields.update({k: v for k, v in overrides.items() if v is not None})
    return AnnealSchedule(**fields)


def gamma_at(schedule: AnnealSchedule, step) -> float:
    frac = step / schedule.total_steps
    return schedule.gamma_min + (schedule.gamma_max - schedule.gamma_min) * frac


# ---------------------------------------------------------------------------
# per-run random streams

class RunStreams:
    """One independent random stream per run.

    Run ``s`` draws from ``SeedSequence(seed, spawn_key=(s,))`` (or from its own
    entry of ``run_seeds``), so its initial point and noise sequence do not
    depend on the number of runs or on any other run. Noise is drawn in blocks
    of several steps per run to keep per-step overhead low.
    """

    BLOCK_BUDGET = 1 << 21

    def __init__(self, seed: int, n_runs: int, run_seeds=None):
        if run_seeds is None:
            seqs = [np.random.SeedSequence(seed, spawn_key=(s,)) for s in range(n_runs)]
        else:
            if len(run_seeds) != n_runs:
                raise ValueError("need one seed per run")
            seqs = [np.random.SeedSequence(int(rs)) for rs in run_seeds]
        self.gens = [np.random.Generator(np.random.PCG64(sq)) for sq in seqs]
        self._buf = None
        self._pos = 0

    @property
    def n_runs(self) -> int:
        return len(self.gens)

    def uniform(self, shape):
        return np.stack([g.random(shape) for g in self.gens])

    def normal(self, shape):
        """Next standard-normal draw of ``shape`` for every run."""
        shape = tuple(shape)
        if self._buf is None or self._pos >= self._buf.shape[1] or self._buf.shape[2:] != shape:
            size = int(np.prod(shape))
            block = int(max(1, min(512, self.BLOCK_BUDGET // max(1, size * self.n_runs))))
            # float32 draws are markedly cheaper and ample for a perturbation
            self._buf = np.stack([g.standard_normal((block, *shape), dtype=np.float32) for g in self.gens])
            self._pos = 0
        out = self._buf[:, self._pos]
        self._pos += 1
        return out


# ---------------------------------------------------------------------------
# steps


def init_ensemble(model: EnergyModel, n_runs: int, seed: int = 0, delta: float = 0.1, streams=None):
    """Start every run near the maximum-entropy point.

    Binary: ``p ~ U(1/2 - delta, 1/2 + delta)``. Categorical: uniform rows with
    relative jitter ``delta``, renormalized.
    """
    if n_runs < 1:
        raise ValueError("need at least one run")
    streams = streams or RunStreams(seed, n_runs)
    if model.categorical:
        k = model.arity
        u = streams.uniform((model.n, k))
        p = kary_sigma((1.0 + delta * (2.0 * u - 1.0)) / k)
    else:
        u = streams.uniform((model.n,))
        p = 0.5 + delta * (2.0 * u - 1.0)
    return RelaxedEnsemble(p), OptimizerState.zeros_like(p)


def adamw_update(p, grad, opt: OptimizerState, lr: float, weight_decay: float):
    """One decoupled-weight-decay Adam step on ``p``; returns the new (unprojected) values.

    ``grad`` is consumed as scratch space.
    """
    opt.step_count += 1
    t = opt.step_count
    m, v = opt.first_moment, opt.second_moment
    m *= opt.beta1
    m += (1.0 - opt.beta1) * grad
    grad *= grad
    grad *= 1.0 - opt.beta2
    v *= opt.beta2
    v += grad
    # m_hat / (sqrt(v_hat) + eps) with the bias corrections folded in
    denom = np.sqrt(v, out=grad)
    denom *= 1.0 / np.sqrt(1.0 - opt.beta2**t)
    denom += opt.eps
    step = np.divide(m, denom, out=denom)
    step *= lr / (1.0 - opt.beta1**t)
    new = p * (1.0 - lr * weight_decay)
    new -= step
    return new


def qqa_step(
    ensemble: RelaxedEnsemble,
    opt: OptimizerState,
    model: EnergyModel,
    schedule: AnnealSchedule,
    step: int,
    streams: Optional[RunStreams] = None,
    entropy_cfg: EntropyConfig = EntropyConfig(),
    comm_cfg: CommConfig = CommConfig(),
    grad_hook=None,
) -> RelaxedEnsemble:
    """Advance all runs by one update using gamma at ``step``."""
    p = ensemble.p
    gamma = gamma_at(schedule, step)
    grad = ensemble_grad(p, model, gamma, entropy_cfg, comm_cfg)
    if model.categorical:
        # project onto the face of the simplex the row currently occupies, so
        # colors in use are not pushed up together and clamped back to a tie
        live = p > 0.0
        grad -= (grad * live).sum(axis=-1, keepdims=True) / live.sum(axis=-1, keepdims=True)
    if grad_hook is not None:
        grad = grad_hook(grad)
    # a finite sum implies finite entries; only search on failure
    if not np.isfinite(grad.sum()) and not np.all(np.isfinite(grad)):
        bad = np.argwhere(~np.isfinite(grad))[0].tolist()
        raise SolverAbort(f"non-finite gradient at step {step}, index {bad}, gamma={gamma:.4g}")
    new = adamw_update(p, grad, opt, schedule.learning_rate, schedule.weight_decay)
    if schedule.noise and schedule.temperature > 0:
        if streams is None:
            raise ValueError("noise requested without a random stream")
        new += np.sqrt(2.0 * schedule.learning_rate * schedule.temperature) * streams.normal(p.shape[1:])
    ensemble.p = kary_sigma(new) if model.categorical else clamp_sigma(new, out=new)
    ensemble.gamma = gamma
    return ensemble


def round_assignments(p, categorical: bool) -> np.ndarray:
    """Threshold at 1/2 (ties go to 1) or take the first row-wise argmax."""
    p = np.asarray(p)
    if categorical:
        return np.argmax(p, axis=-1)
    return (p >= 0.5).astype(np.int64)


def round_solution(ensemble: RelaxedEnsemble, model: EnergyModel):
    x = round_assignments(ensemble.p, model.categorical)
    return [model.solution(row) for row in x]


def repair_mis(sol: DiscreteSolution, model: EnergyModel) -> DiscreteSolution:
    """Drop conflicting nodes (highest selected-degree first, lowest index on ties)."""
    if model.kind is not Kind.MIS:
        raise ValueError("repair_mis only applies to MIS models")
    x = sol.assignment.copy()
    nbrs = model.graph.neighbors()
    while True:
        sel_deg = np.array([sum(x[j] for j, _ in nbrs[i]) if x[i] else 0 for i in range(model.n)])
        if sel_deg.max(initial=0) == 0:
            break
        x[int(np.argmax(sel_deg))] = 0
    return model.solution(x)


# ---------------------------------------------------------------------------
# driver


@dataclass
class TracePoint:
    step: int
    gamma: float
    mean_entropy: float
    best_energy: float
    best_objective: float
    best_feasible: bool


@dataclass
class RunReport:
    best: DiscreteSolution
    best_run: int
    run_best_energy: np.ndarray
    run_best_assignment: np.ndarray
    final_entropy: np.ndarray
    trace: list = field(default_factory=list)
    wall_time: float = 0.0
    seed: int = 0
    config: dict = field(default_factory=dict)

    @property
    def best_energy(self) -> float:
        return self.best.energy

    @property
    def best_objective(self) -> float:
        return self.best.objective

    @property
    def feasible(self) -> bool:
        return self.best.feasible

    @property
    def mean_final_entropy(self) -> float:
        return float(np.mean(self.final_entropy))

    def steps_to_objective(self, target: float, maximize: bool = True) -> Optional[int]:
        """First traced step whose best solution is feasible and reaches ``target``; None if never."""
        for tp in self.trace:
            if tp.best_feasible and (tp.best_objective >= target if maximize else tp.best_objective <= target):
                return tp.step
        return None

    def steps_to_fraction(self, frac: float = 0.99, maximize: bool = True) -> Optional[int]:
        """First traced step whose feasible best is within ``frac`` of the final best.

        For minimized objectives (conflicts, cut edges) the target is
        ``final / frac``; a final value of 0 must be hit exactly. None when
        no feasible solution was traced.
        """
        final = next((tp for tp in reversed(self.trace) if tp.best_feasible), None)
        if final is None:
            return None
        target = frac * final.best_objective if maximize else final.best_objective / frac
        return self.steps_to_objective(target, maximize)


def run(
    model: EnergyModel,
    n_runs: int = 100,
    schedule: Optional[AnnealSchedule] = None,
    comm_cfg: CommConfig = CommConfig(),
    entropy_cfg: EntropyConfig = EntropyConfig(),
    seed: int = 0,
    run_seeds=None,
    grad_hook=None,
) -> RunReport:
    """Anneal ``n_runs`` coupled runs for ``schedule.total_steps`` updates.

    ``schedule`` defaults to :func:`default_schedule` for the model's kind.
    """
    t0 = time.perf_counter()
    schedule = schedule or default_schedule(model.kind)
    streams = RunStreams(seed, n_runs, run_seeds)
    ens, opt = init_ensemble(model, n_runs, seed, schedule.init_delta, streams)
    cat = model.categorical
    best_e = np.full(n_runs, np.inf)
    best_x = np.zeros((n_runs, model.n), dtype=np.int64)
    trace = []

    def evaluate(step):
        x = round_assignments(ens.p, cat)
        e = np.atleast_1d(model.energy(x))
        better = e < best_e
        best_e[better] = e[better]
        best_x[better] = x[better]
        ent = entropy_per_node(ens.p, cat, entropy_cfg)
        k = int(np.argmin(best_e))
        obj = float(model.objective(best_x[k]))
        ok = bool(model.violation(best_x[k]) == 0)
        trace.append(TracePoint(step, gamma_at(schedule, step), float(np.mean(ent)), float(best_e[k]), obj, ok))
        return ent

    evaluate(0)
    total, every = schedule.total_steps, schedule.interval
    for step in range(1, total + 1):
        qqa_step(ens, opt, model, schedule, step, streams, entropy_cfg, comm_cfg, grad_hook)
        if step % every == 0 or step == total:
            ent = evaluate(step)
    k = int(np.argmin(best_e))
    return RunReport(
        best=model.solution(best_x[k]),
        best_run=k,
        run_best_energy=best_e,
        run_best_assignment=best_x,
        final_entropy=ent,
        trace=trace,
        wall_time=time.perf_counter() - t0,
        seed=seed,
        config={
            "n_runs": n_runs,
            "schedule": asdict(schedule),
            "comm": asdict(comm_cfg),
            "entropy": asdict(entropy_cfg),
            "seed": seed,
            "run_seeds": None if run_seeds is None else [int(s) for s in run_seeds],
        },
    )
