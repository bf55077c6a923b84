"""Normal geodesics between submanifolds of standard stationary spacetimes."""

from .errors import (
    DegenerateCurveError,
    DegenerateSubmanifoldError,
    DomainError,
    GeodesicError,
    ModelError,
    NotFoundError,
    ProjectionError,
    ScenarioError,
)
from .fermat import FermatStructure, Side, arrival_time, fermat_distance, fermat_length, lightlike_lift
from .reduction import ReducedState, eval_f, eval_J, grad_J, reconstruct_t
from .scenarios import CATALOG, Scenario, builtin
from .solver import SolveParams, SolveResult, diagnose, refine, solve_normal_geodesic
from .spacetime import CausalCharacter, MetricField, SpacetimeCurve
from .submanifolds import BoundaryPair, Hypothesis, Submanifold
from .submersion import BaseMetric, horizontal_lift

__all__ = [name for name in dir() if not name.startswith("_")]
