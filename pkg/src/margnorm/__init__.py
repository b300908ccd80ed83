"""Exact tools for marginal cones and marginal semigroups of contingency tables.

The headline routine is :func:`margnorm.normality.classify_normality`, which
decides normality of a binary graph model and returns a checkable certificate.
"""

from margnorm.complexes import (
    FullMarginalVector,
    Model,
    ReducedMarginalVector,
    SimplicialComplex,
    Table,
    build_complex,
    expand_coords,
    generators,
    marginalize,
    reduce_coords,
)
from margnorm.errors import (
    GuardError,
    InputError,
    InvariantError,
    MargnormError,
    PreconditionError,
    UnsupportedError,
)
from margnorm.graphs import Graph

__version__ = "0.1.0"

__all__ = [
    "FullMarginalVector",
    "Graph",
    "GuardError",
    "InputError",
    "InvariantError",
    "MargnormError",
    "Model",
    "PreconditionError",
    "ReducedMarginalVector",
    "SimplicialComplex",
    "Table",
    "UnsupportedError",
    "build_complex",
    "expand_coords",
    "generators",
    "marginalize",
    "reduce_coords",
]
