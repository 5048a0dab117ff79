"""
Spectral and closed-form field solvers for cylindrically layered uniaxial media.
"""

from src.solver.analytic import analytic_fields, analytic_for_layer
from src.solver.errors import SolverError
from src.solver.integrand import SourceVector
from src.solver.media import Layer, LayerStack, UniaxialTensor
from src.solver.results import COMPONENTS, FieldDiagnostics, FieldResult
from src.solver.spectral import PathKind, SubtractionMode, SummationConfig, evaluate

__all__ = [
    "COMPONENTS",
    "FieldDiagnostics",
    "FieldResult",
    "Layer",
    "LayerStack",
    "PathKind",
    "SolverError",
    "SourceVector",
    "SubtractionMode",
    "SummationConfig",
    "UniaxialTensor",
    "analytic_fields",
    "analytic_for_layer",
    "evaluate",
]
