"""Fair-sampling analysis of quantum annealing on degenerate Ising ground states."""

from .ising import (ProblemInstance, GroundStateSet, energy,
                    enumerate_ground_states, generate_lattice_instance,
                    mine_instances)
from .driver import DriverSpec, apply_driver, driver_ground_state, uniform_driver
from .anneal import (AnnealTrace, build_problem_diagonal, integrate_anneal,
                     final_distribution)
from .perturbation import (SubspaceMatrix, SamplingPrediction,
                           build_first_order_V, build_second_order_V,
                           predict, classify, predict_for_instance, driver_study)
from .mc import (Schedule, SampleHistogram, sa_run, sqa_run,
                 sample_distribution, rank_order_average)

__all__ = [
    "ProblemInstance", "GroundStateSet", "energy", "enumerate_ground_states",
    "generate_lattice_instance", "mine_instances",
    "DriverSpec", "apply_driver", "driver_ground_state", "uniform_driver",
    "AnnealTrace", "build_problem_diagonal", "integrate_anneal",
    "final_distribution",
    "SubspaceMatrix", "SamplingPrediction", "build_first_order_V",
    "build_second_order_V", "predict", "classify", "predict_for_instance",
    "driver_study",
    "Schedule", "SampleHistogram", "sa_run", "sqa_run",
    "sample_distribution", "rank_order_average",
]

__version__ = "0.1.0"
