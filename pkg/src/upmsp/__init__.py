"""Neighbourhood-utility laboratory for R|s_ijk|Cmax.

Simulated Annealing over six makespan-machine neighbourhoods, complete
neighbourhood censuses on every incumbent change, a log-utility
regression per neighbourhood, and utility-biased neighbourhood selection.
"""

from .annealing import (AdaptivePolicy, AnnealingScheduler, UniformPolicy,
                        adaptive_probabilities, initial_solution)
from .core import Instance, Solution, evaluate_full, evaluate_machine
from .instances import GeneratorSpec, generate, read_instance, write_instance
from .neighbourhoods import (NEIGHBOURHOODS, Neighbourhood, apply_move,
                             cardinality, enumerate_moves, sample_uniform)
from .regression import UtilityFeatures, UtilityRegressor, fit_models
from .telemetry import NeighbourhoodStats, census

__version__ = "0.1.0"

__all__ = [
    "AdaptivePolicy", "AnnealingScheduler", "GeneratorSpec", "Instance",
    "NEIGHBOURHOODS", "Neighbourhood", "NeighbourhoodStats", "Solution",
    "UniformPolicy", "UtilityFeatures", "UtilityRegressor",
    "adaptive_probabilities", "apply_move", "cardinality", "census",
    "enumerate_moves", "evaluate_full", "evaluate_machine", "fit_models",
    "generate", "initial_solution", "read_instance", "sample_uniform",
    "write_instance",
]
