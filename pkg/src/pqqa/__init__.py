"""Parallel quasi-quantum annealing for graph combinatorial optimization."""

from .annealer import AnnealSchedule, RunReport, SolverAbort, default_schedule, repair_mis, run
from .baseline import SAConfig, boltzmann_enumerate, brute_force, greedy_mis, sa_solve
from .graphio import Graph, generate, read_graph
from .problems import EnergyModel, Kind, compute_metrics
from .relax import CommConfig, EntropyConfig

__version__ = "0.1.0"

__all__ = [
    "AnnealSchedule",
    "CommConfig",
    "EnergyModel",
    "EntropyConfig",
    "Graph",
    "Kind",
    "RunReport",
    "SAConfig",
    "SolverAbort",
    "boltzmann_enumerate",
    "brute_force",
    "compute_metrics",
    "default_schedule",
    "generate",
    "greedy_mis",
    "read_graph",
    "repair_mis",
    "run",
    "sa_solve",
]
