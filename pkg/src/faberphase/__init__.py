"""Diffuse-interface Faber-Krahn numerics.

FaberPhase computes principal eigenvalues of -Laplace + b^eps(phi) on a
ball, minimizes the Ginzburg-Landau regularized objective over phase
fields, rearranges fields symmetrically and checks the sharp-interface
limit against closed-form eigenvalues of balls.

Example:
    >>> from faberphase import ExperimentConfig, ExperimentRunner
    >>> runner = ExperimentRunner(ExperimentConfig(resolution=64))
    >>> summary = runner.run_eig("ones")
"""

__version__ = "0.1.0"

from .coefficient import CoefficientFamily
from .config import ExperimentConfig
from .eigen import EigenPair, assemble, principal_eigenpair, sharp_eigenvalue
from .exceptions import (
    ArtifactError,
    AssumptionError,
    ConfigurationError,
    FaberPhaseError,
    InfeasibleMassError,
    OptimizationError,
    PropertyViolationError,
    SolverError,
    ValidationError,
)
from .experiments import ExperimentRunner
from .grid import BallDomain, CartesianGrid, PhaseField, RadialGrid, ScalarField, build_grid
from .objective import evaluate_objective, gl_energy, j_eps, j_zero
from .optimize import OptimizerConfig, minimize, project_admissible
from .potential import Potential
from .profile import gamma_check, recovery_sequence, solve_profile
from .rearrange import rearrange
from .shapes import SharpShape, parse_shape

__all__ = [
    "__version__",
    "BallDomain",
    "RadialGrid",
    "CartesianGrid",
    "ScalarField",
    "PhaseField",
    "build_grid",
    "Potential",
    "CoefficientFamily",
    "EigenPair",
    "assemble",
    "principal_eigenpair",
    "sharp_eigenvalue",
    "rearrange",
    "SharpShape",
    "parse_shape",
    "gl_energy",
    "j_eps",
    "j_zero",
    "evaluate_objective",
    "OptimizerConfig",
    "minimize",
    "project_admissible",
    "solve_profile",
    "recovery_sequence",
    "gamma_check",
    "ExperimentConfig",
    "ExperimentRunner",
    "FaberPhaseError",
    "ConfigurationError",
    "ValidationError",
    "AssumptionError",
    "InfeasibleMassError",
    "SolverError",
    "OptimizationError",
    "PropertyViolationError",
    "ArtifactError",
]
