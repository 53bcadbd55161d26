"""Bregman shrinking-projection solver with a property-test harness.

The public surface is split by module:

* :mod:`bregshrink.geometry`     Legendre functions and Bregman distances
* :mod:`bregshrink.operators`    monotone operators and demimetric mappings
* :mod:`bregshrink.feasibility`  halfspace ledgers and Bregman projections
* :mod:`bregshrink.solver`       the iteration, traces and the oracle
* :mod:`bregshrink.diagnostics`  seeded property suites and reports
* :mod:`bregshrink.cli`          the ``bregshrink`` command
"""

from .feasibility import ConstraintLedger, ProjectionReport, project_ledger, project_polyhedron
from .geometry import LegendreGeometry, negative_entropy, pnorm, squared_norm
from .operators import OperatorFamilies, default_families
from .problemfile import load_problem, parse_problem
from .solver import ProblemSpec, Schedules, StopRule, oracle_solution, run

__version__ = "0.1.0"

__all__ = [
    "LegendreGeometry",
    "squared_norm",
    "negative_entropy",
    "pnorm",
    "OperatorFamilies",
    "default_families",
    "ConstraintLedger",
    "ProjectionReport",
    "project_polyhedron",
    "project_ledger",
    "ProblemSpec",
    "Schedules",
    "StopRule",
    "run",
    "oracle_solution",
    "parse_problem",
    "load_problem",
]
