"""Numerical toolkit for Loewner evolution in the unit disk.

Builds Becker quasiconformal extensions from Loewner chains, classifies
extensions as Becker or not through per-circle Fourier coefficients of
the Beltrami field, constructs the lambda-interpolated Herglotz
families behind holomorphic motions, and runs Loewner-range
diagnostics, validated against a closed-form catalog.
"""

__version__ = "0.1.0"

from . import analysis, becker, chains, core, errors, evolution, herglotz
from .analysis import (BeltramiField, ClosedFormMap, GridSampler,
                       beltrami_field, oracle, schwarzian, schwarzian_bounds,
                       schwarzian_norm, wirtinger)
from .becker import (BeckerReport, BoundarySettings, QCExtensionGrid,
                     becker_extend, circle_fourier, classify_becker,
                     recover_herglotz_from_mu)
from .chains import (ChainEvaluator, ChainSettings, RangeReport, chain_eval,
                     range_diagnostic)
from .core import MobiusTransform, PolarGrid, cross_ratio
from .errors import (NumericalError, ToolkitError, ValidationError)
from .evolution import (EvolutionTrajectory, LambdaFamily, SolverSettings,
                        VectorField, assemble_vector_field,
                        check_evolution_axioms, evolve_point,
                        holomorphic_motion_probe, lambda_evolution)
from .herglotz import (HerglotzSpec, catalog_herglotz, check_becker_condition,
                       essential_example_driving, parse_driving_spec,
                       parse_herglotz_spec)

__all__ = [
    "__version__",
    "analysis", "becker", "chains", "core", "errors", "evolution", "herglotz",
    "BeltramiField", "ClosedFormMap", "GridSampler", "beltrami_field",
    "oracle", "schwarzian", "schwarzian_bounds", "schwarzian_norm",
    "wirtinger",
    "BeckerReport", "BoundarySettings", "QCExtensionGrid", "becker_extend",
    "circle_fourier", "classify_becker", "recover_herglotz_from_mu",
    "ChainEvaluator", "ChainSettings", "RangeReport", "chain_eval",
    "range_diagnostic",
    "MobiusTransform", "PolarGrid", "cross_ratio",
    "NumericalError", "ToolkitError", "ValidationError",
    "EvolutionTrajectory", "LambdaFamily", "SolverSettings", "VectorField",
    "assemble_vector_field", "check_evolution_axioms", "evolve_point",
    "holomorphic_motion_probe", "lambda_evolution",
    "HerglotzSpec", "catalog_herglotz", "check_becker_condition",
    "essential_example_driving", "parse_driving_spec", "parse_herglotz_spec",
]
