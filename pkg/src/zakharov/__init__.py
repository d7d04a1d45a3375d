"""Energy-conservative finite-difference solvers for the periodic 1-D Zakharov equations."""
from .exact import InitialData, SolitonParams, resolve_soliton, sample_collision_initial, sample_single_soliton
from .grid import Grid
from .harness import ExperimentConfig, RunReport, collision_comparison, convergence_study, emit, run_experiment
from .schemes import SchemeConfig, State

__all__ = [
    "ExperimentConfig", "Grid", "InitialData", "RunReport", "SchemeConfig", "SolitonParams", "State",
    "collision_comparison", "convergence_study", "emit", "resolve_soliton", "run_experiment",
    "sample_collision_initial", "sample_single_soliton",
]
