"""Distributed orientation estimation in SO(n) via consensus on
auxiliary variables, with the resulting 3-D formation control and
network localization laws, plus independent spectral oracles."""

from .circle import OscillatorState, evenly_spaced_angles, run_circle, wrap_angle
from .engine import IntegratorConfig, Trajectory, integrate
from .estimator import (
    EstimatorState,
    aligned_estimates,
    assemble_estimate,
    build_H,
    check_initialization,
    estimator_derivative,
    run_estimation,
    steady_state_oracle,
)
from .formation import FormationScenario, run_formation
from .graph import DiGraph, has_rooted_out_branch, laplacian, zero_eigen_left_vector
from .localization import (
    LocalizationScenario,
    pairwise_distance_error,
    run_localization,
)
from .rotation import (
    complete_rotation,
    gram_schmidt,
    random_rotation,
    relative_orientation,
    rotation_distance,
)
from .scenario import FIG3_EDGES, load_scenario, template_scenario

__all__ = [
    "DiGraph",
    "EstimatorState",
    "FIG3_EDGES",
    "FormationScenario",
    "IntegratorConfig",
    "LocalizationScenario",
    "OscillatorState",
    "Trajectory",
    "aligned_estimates",
    "assemble_estimate",
    "build_H",
    "check_initialization",
    "complete_rotation",
    "estimator_derivative",
    "evenly_spaced_angles",
    "gram_schmidt",
    "has_rooted_out_branch",
    "integrate",
    "laplacian",
    "load_scenario",
    "pairwise_distance_error",
    "random_rotation",
    "relative_orientation",
    "rotation_distance",
    "run_circle",
    "run_estimation",
    "run_formation",
    "run_localization",
    "steady_state_oracle",
    "template_scenario",
    "wrap_angle",
    "zero_eigen_left_vector",
]

__version__ = "0.1.0"
