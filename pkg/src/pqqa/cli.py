"""Command-line harness: ``pqqa solve``, ``pqqa sweep`` and ``pqqa verify``.

Exit codes: 0 success, 2 configuration error, 3 I/O or input-format error,
4 solver abort, 1 failed verification. ``PQQA_THREADS`` fixes the BLAS
thread count (default 1), which keeps reports byte-for-byte reproducible.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Optional

from .annealer import SolverAbort, default_schedule, repair_mis, run
from .baseline import InstanceTooLarge, SAConfig, brute_force, greedy_mis, reference_value, sa_solve
from .graphio import (
    GenerationError,
    GraphFormatError,
    InstanceMeta,
    family_name,
    generate,
    parse_generator_spec,
    read_graph,
)
from .problems import DEFAULT_LAMBDA, EnergyModel, Kind, compute_metrics, select_lambda
from .relax import CommConfig, EntropyConfig

SCHEMA_VERSION = "1.0"
THREADS_ENV = "PQQA_THREADS"
EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_IO, EXIT_ABORT = 0, 1, 2, 3, 4

SOLVE_COLUMNS = (
    "problem", "instance", "n_nodes", "n_edges", "solver", "seed", "objective", "energy",
    "feasible", "penalty_violation", "apr", "reference", "final_mean_entropy", "wall_time",
)
SWEEP_COLUMNS = (
    "axis", "value", "seed", "best_objective", "best_energy", "feasible", "apr",
    "final_mean_entropy", "steps_to_99", "trace_steps", "trace_best_objective", "trace_best_feasible", "wall_time",
)
SWEEP_AXES = ("gamma0", "steps", "comm_strength")


class ConfigError(ValueError):
    pass


@dataclass
class SolveConfig:
    problem: str
    gen: Optional[str] = None
    input: Optional[str] = None
    solver: str = "pqqa"
    runs: int = 100
    steps: int = 3000
    lr: Optional[float] = None
    gamma_min: float = -2.0
    gamma_max: float = 0.1
    temperature: float = 1e-3
    weight_decay: float = 0.01
    eval_interval: Optional[int] = None
    noise: bool = True
    comm: float = 0.2
    alpha: int = 4
    seed: int = 0
    lam: Optional[float] = None
    auto_lambda: bool = False
    colors: Optional[int] = None
    parts: Optional[int] = None
    reference: Optional[float] = None
    repair: bool = False
    sa_steps: int = 100_000
    sa_t_start: float = 1.0
    sa_t_end: float = 0.01
    sa_schedule: str = "geometric"
    sa_mode: str = "metropolis"
    output: Optional[str] = None
    format: str = "json"
    omit_timing: bool = False

    def validate(self):
        if (self.gen is None) == (self.input is None):
            raise ConfigError("give exactly one of --gen or --input")
        try:
            kind = Kind(self.problem)
        except ValueError:
            raise ConfigError(f"unknown problem {self.problem!r}") from None
        if self.solver not in ("pqqa", "sa", "greedy", "brute"):
            raise ConfigError(f"unknown solver {self.solver!r}")
        if self.solver == "greedy" and kind is not Kind.MIS:
            raise ConfigError("the greedy solver only handles mis")
        if kind is Kind.COLORING and not self.colors:
            raise ConfigError("coloring needs --colors")
        if kind is Kind.PARTITION and not self.parts:
            raise ConfigError("partition needs --parts")
        if self.runs < 1 or self.steps < 1 or self.sa_steps < 1:
            raise ConfigError("runs and step counts must be positive")
        if self.lr is not None and self.lr <= 0:
            raise ConfigError("learning rate must be positive")
        if self.gamma_min > self.gamma_max:
            raise ConfigError("gamma-min must not exceed gamma-max")
        if not 0.0 <= self.comm <= 1.0:
            raise ConfigError("comm strength must lie in [0, 1]")
        if self.alpha < 2 or self.alpha % 2:
            raise ConfigError("entropy exponent must be an even integer >= 2")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")
        if self.repair and kind is not Kind.MIS:
            raise ConfigError("--repair only applies to mis")
        return self

    @property
    def kind(self) -> Kind:
        return Kind(self.problem)

    @property
    def arity(self) -> int:
        return {Kind.COLORING: self.colors, Kind.PARTITION: self.parts}.get(self.kind) or 2


# ---------------------------------------------------------------------------
# instances and solving


def load_instance(cfg: SolveConfig):
    """Return ``(graph, InstanceMeta)``; OSError / GraphFormatError propagate as I/O failures."""
    if cfg.input is not None:
        graph = read_graph(cfg.input)
        return graph, InstanceMeta(os.path.basename(cfg.input), "File", 0, {"path": cfg.input})
    fam, params = parse_generator_spec(cfg.gen)
    gseed = int(params.pop("seed", 0))
    try:
        graph = generate(fam, params, gseed)
        meta = InstanceMeta(cfg.gen, family_name(fam), gseed, dict(params))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad generator spec {cfg.gen!r}: {exc}") from None
    return graph, meta


def build_model(cfg: SolveConfig, graph) -> EnergyModel:
    lam = cfg.lam if cfg.lam is not None else DEFAULT_LAMBDA[cfg.kind.value]
    model = EnergyModel(cfg.kind, graph, lam=lam, arity=cfg.arity)
    if cfg.auto_lambda:
        model = model.with_lambda(select_lambda(model))
    return model


def schedule_of(cfg: SolveConfig):
    return default_schedule(
        cfg.kind,
        total_steps=cfg.steps,
        learning_rate=cfg.lr,
        gamma_min=cfg.gamma_min,
        gamma_max=cfg.gamma_max,
        temperature=cfg.temperature,
        weight_decay=cfg.weight_decay,
        eval_interval=cfg.eval_interval,
        noise=cfg.noise,
    )


def sa_config_of(cfg: SolveConfig) -> SAConfig:
    return SAConfig(cfg.sa_steps, cfg.sa_t_start, cfg.sa_t_end, cfg.sa_schedule, cfg.seed, cfg.sa_mode)


@dataclass
class Outcome:
    best: object
    final_mean_entropy: Optional[float] = None
    trace: list = field(default_factory=list)
    wall_time: float = 0.0
    engine: dict = field(default_factory=dict)
    steps_to_99: Optional[int] = None


def solve_model(cfg: SolveConfig, model: EnergyModel) -> Outcome:
    t0 = time.perf_counter()
    if cfg.solver == "pqqa":
        rep = run(
            model,
            cfg.runs,
            schedule_of(cfg),
            CommConfig(comm_strength=cfg.comm),
            EntropyConfig(alpha=cfg.alpha),
            seed=cfg.seed,
        )
        best = repair_mis(rep.best, model) if cfg.repair else rep.best
        return Outcome(
            best,
            rep.mean_final_entropy,
            [asdict(tp) for tp in rep.trace],
            rep.wall_time,
            rep.config,
            rep.steps_to_fraction(0.99, model.kind.maximize),
        )
    if cfg.solver == "sa":
        best = sa_solve(model, sa_config_of(cfg))
        engine = asdict(sa_config_of(cfg))
    elif cfg.solver == "greedy":
        best, engine = greedy_mis(model.graph, cfg.seed), {"seed": cfg.seed}
        best = model.solution(best.assignment)
    else:
        best, engine = brute_force(model), {}
    return Outcome(best, wall_time=time.perf_counter() - t0, engine=engine)


def resolve_reference(cfg: SolveConfig, model: EnergyModel):
    if cfg.reference is not None:
        return cfg.reference, "user"
    ref = reference_value(model)
    return (ref, "brute_force") if ref is not None else (None, None)


def build_report(cfg: SolveConfig, model: EnergyModel, meta: InstanceMeta, out: Outcome, reference, ref_source) -> dict:
    metrics = compute_metrics(out.best, model, reference)
    echo = asdict(cfg)
    echo.pop("output")
    return {
        "schema_version": SCHEMA_VERSION,
        "problem": {
            "kind": model.kind.value,
            "arity": model.arity,
            "lambda": model.lam,
            "n_nodes": model.n,
            "n_edges": model.graph.n_edges,
        },
        "instance": asdict(meta),
        "solver": cfg.solver,
        "seed": cfg.seed,
        "config": echo,
        "engine": out.engine,
        "best": out.best.to_dict(),
        "metrics": metrics.to_dict(),
        "reference": {"value": reference, "source": ref_source},
        "final_mean_entropy": out.final_mean_entropy,
        "steps_to_99": out.steps_to_99,
        "trace": out.trace,
        "wall_time": None if cfg.omit_timing else out.wall_time,
    }


def solve_row(report: dict) -> dict:
    best = report["best"]
    return {
        "problem": report["problem"]["kind"],
        "instance": report["instance"]["name"],
        "n_nodes": report["problem"]["n_nodes"],
        "n_edges": report["problem"]["n_edges"],
        "solver": report["solver"],
        "seed": report["seed"],
        "objective": best["objective"],
        "energy": best["energy"],
        "feasible": best["feasible"],
        "penalty_violation": best["penalty_violation"],
        "apr": report["metrics"]["apr"],
        "reference": report["reference"]["value"],
        "final_mean_entropy": report["final_mean_entropy"],
        "wall_time": report["wall_time"],
    }


# ---------------------------------------------------------------------------
# output


def load_schema() -> dict:
    return json.loads(resources.files("pqqa").joinpath("report.schema.json").read_text())


def validate_report(report: dict):
    import jsonschema

    jsonschema.validate(report, load_schema())


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def to_csv(rows, columns) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: "" if row.get(k) is None else row[k] for k in columns})
    return buf.getvalue()


def write_atomic(path: Optional[str], text: str):
    """Write ``text`` to ``path`` (stdout when None) without leaving partial files behind."""
    if path is None:
        sys.stdout.write(text)
        return
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".pqqa-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# commands


def solve_command(cfg: SolveConfig) -> dict:
    cfg.validate()
    graph, meta = load_instance(cfg)
    model = build_model(cfg, graph)
    reference, source = resolve_reference(cfg, model)
    out = solve_model(cfg, model)
    report = build_report(cfg, model, meta, out, reference, source)
    validate_report(report)
    text = to_json(report) if cfg.format == "json" else to_csv([solve_row(report)], SOLVE_COLUMNS)
    write_atomic(cfg.output, text)
    return report


def _apply_axis(cfg: SolveConfig, axis: str, value: float) -> SolveConfig:
    fields = asdict(cfg)
    if axis == "gamma0":
        fields["gamma_min"] = float(value)
    elif axis == "steps":
        if float(value) != int(value) or value < 1:
            raise ConfigError(f"steps must be a positive integer, got {value}")
        fields["steps"] = int(value)
    else:
        fields["comm"] = float(value)
    return SolveConfig(**fields).validate()


def _sweep_cell(args):
    cfg, model, reference, axis, value, seed = args
    cell = _apply_axis(cfg, axis, value)
    cell.seed = seed
    out = solve_model(cell, model)
    metrics = compute_metrics(out.best, model, reference)
    return {
        "axis": axis,
        "value": value,
        "seed": seed,
        "best_objective": out.best.objective,
        "best_energy": out.best.energy,
        "feasible": out.best.feasible,
        "apr": metrics.apr,
        "final_mean_entropy": out.final_mean_entropy,
        "steps_to_99": out.steps_to_99,
        "trace_steps": ";".join(str(tp["step"]) for tp in out.trace),
        "trace_best_objective": ";".join(repr(tp["best_objective"]) for tp in out.trace),
        "trace_best_feasible": ";".join(str(int(tp["best_feasible"])) for tp in out.trace),
        "wall_time": None if cfg.omit_timing else round(out.wall_time, 6),
    }


def sweep_command(cfg: SolveConfig, axis: str, values, seeds=(0, 1, 2, 3, 4), workers: int = 1):
    """One CSV row per (value, seed), written in that order."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}")
    values = list(values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    if cfg.solver != "pqqa":
        raise ConfigError("sweeps drive the pqqa solver")
    cfg.validate()
    for v in values:
        _apply_axis(cfg, axis, v)
    graph, _ = load_instance(cfg)
    model = build_model(cfg, graph)
    reference, _ = resolve_reference(cfg, model)
    cells = [(cfg, model, reference, axis, v, s) for v in values for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(c) for c in cells]
    write_atomic(cfg.output, to_csv(rows, SWEEP_COLUMNS))
    return rows


def verify_command(corrupt_gradient: bool = False, suites=None, stream=None) -> bool:
    from .verify import run_suites

    stream = stream or sys.stdout
    results = run_suites(suites, corrupt_gradient=corrupt_gradient)
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} {res.name:<18} {res.checks:3d} checks  {res.seconds:7.2f}s", file=stream)
        for failure in res.failures:
            print(f"     broken invariant: {failure}", file=stream)
    ok = all(r.passed for r in results)
    print(f"{'all suites passed' if ok else 'verification FAILED'} ({sum(r.seconds for r in results):.1f}s)", file=stream)
    return ok


# ---------------------------------------------------------------------------
# argument parsing


def _add_solve_args(p: argparse.ArgumentParser):
    p.add_argument("--problem", required=True, choices=[k.value for k in Kind])
    src = p.add_mutually_exclusive_group()
    src.add_argument("--gen", help='generator spec such as "er:n=700,p=0.15,seed=1"')
    src.add_argument("--input", help="DIMACS or weighted edge-list file")
    p.add_argument("--solver", default="pqqa", choices=["pqqa", "sa", "greedy", "brute"])
    p.add_argument("--runs", type=int, default=100, help="parallel runs S")
    p.add_argument("--steps", type=int, default=3000)
    p.add_argument("--lr", type=float, default=None, help="learning rate (default depends on the problem)")
    p.add_argument("--gamma-min", type=float, default=-2.0)
    p.add_argument("--gamma-max", type=float, default=0.1)
    p.add_argument("--temperature", type=float, default=1e-3)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--eval-interval", type=int, default=None)
    p.add_argument("--no-noise", dest="noise", action="store_false")
    p.add_argument("--comm", type=float, default=0.2, help="communication strength in [0, 1]")
    p.add_argument("--alpha", type=int, default=4, help="entropy exponent")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lam", type=float, default=None, help="penalty weight")
    p.add_argument("--auto-lambda", action="store_true", help="pick the penalty weight by enumeration")
    p.add_argument("--colors", type=int, default=None)
    p.add_argument("--parts", type=int, default=None)
    p.add_argument("--reference", type=float, default=None, help="reference objective for ApR")
    p.add_argument("--repair", action="store_true", help="greedy feasibility pass for mis")
    p.add_argument("--sa-steps", type=int, default=100_000)
    p.add_argument("--sa-t-start", type=float, default=1.0)
    p.add_argument("--sa-t-end", type=float, default=0.01)
    p.add_argument("--sa-schedule", default="geometric", choices=["geometric", "linear"])
    p.add_argument("--sa-mode", default="metropolis", choices=["metropolis", "gibbs"])
    p.add_argument("--output", "-o", default=None)
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.add_argument("--omit-timing", action="store_true", help="write null wall times (for byte-stable reports)")
    p.add_argument("--config", default=None, help="JSON file whose keys override the defaults above")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pqqa", description="Parallel quasi-quantum annealing solver.")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_solve_args(sub.add_parser("solve", help="solve one instance"))
    sweep = sub.add_parser("sweep", help="ablation sweep over one schedule axis (CSV)")
    _add_solve_args(sweep)
    sweep.add_argument("--axis", required=True, choices=SWEEP_AXES)
    sweep.add_argument("--values", required=True, help="comma-separated values")
    sweep.add_argument("--seeds", type=int, default=5, help="seeds 0..n-1 per value")
    sweep.add_argument("--workers", type=int, default=1)
    verify = sub.add_parser("verify", help="run the oracle suites")
    verify.add_argument("--suite", action="append", default=None)
    verify.add_argument("--corrupt-gradient", action="store_true", help="negative control: perturb relaxed gradients")
    return parser


def _solve_config(ns) -> SolveConfig:
    fields = {k: v for k, v in vars(ns).items() if k in SolveConfig.__dataclass_fields__}
    if ns.config:
        with open(ns.config) as fh:
            overrides = json.load(fh)
        unknown = set(overrides) - set(SolveConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        fields.update(overrides)
    return SolveConfig(**fields)


def _parse_values(text: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad value list {text!r}") from None


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1")
    return n


def _dispatch(ns) -> int:
    if ns.command == "verify":
        if ns.suite:
            from .verify import SUITES

            unknown = set(ns.suite) - set(SUITES)
            if unknown:
                raise ConfigError(f"unknown suites: {sorted(unknown)}")
        return EXIT_OK if verify_command(ns.corrupt_gradient, ns.suite) else EXIT_VERIFY
    cfg = _solve_config(ns)
    if ns.command == "solve":
        solve_command(cfg)
    else:
        sweep_command(cfg, ns.axis, _parse_values(ns.values), tuple(range(ns.seeds)), ns.workers)
    return EXIT_OK


def main(argv=None) -> int:
    from threadpoolctl import threadpool_limits

    ns = make_parser().parse_args(argv)
    try:
        with threadpool_limits(limits=_threads()):
            return _dispatch(ns)
    except (GraphFormatError, OSError) as exc:
        print(f"pqqa: input/output error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SolverAbort, GenerationError, FloatingPointError) as exc:
        print(f"pqqa: solver aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (ConfigError, InstanceTooLarge, ValueError, TypeError) as exc:
        print(f"pqqa: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
